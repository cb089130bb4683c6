// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "cpft/errors.hpp"

namespace cpft {

std::string_view to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kPretrainedTransformer:
      return "pretrained_transformer";
    case EncoderKind::kTinyTransformer:
      return "tiny_transformer";
    case EncoderKind::kBagOfEmbeddings:
      return "bag_of_embeddings";
  }
  return "unknown";
}

// Case-insensitive, so "TINY_TRANSFORMER" and "tiny_transformer" both parse.
EncoderKind parse_encoder_kind(std::string_view raw) {
  std::string text(raw);
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (text == "pretrained_transformer") return EncoderKind::kPretrainedTransformer;
  if (text == "tiny_transformer") return EncoderKind::kTinyTransformer;
  if (text == "bag_of_embeddings") return EncoderKind::kBagOfEmbeddings;
  throw ConfigError("unknown encoder kind \"" + std::string(raw) + "\"");
}

void EncoderConfig::validate() const {
  if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (max_sequence_length < 8) throw ConfigError("max_sequence_length must be >= 8");
  if (kind == EncoderKind::kBagOfEmbeddings) return;
  if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
  if (num_heads < 1 || hidden_size % num_heads != 0) {
    throw ConfigError("num_heads must divide hidden_size");
  }
  if (ffn_size < 1) throw ConfigError("ffn_size must be >= 1");
  if (kind == EncoderKind::kPretrainedTransformer && pretrained_path.empty()) {
    throw ConfigError("pretrained_transformer needs pretrained_path");
  }
}

std::size_t ParameterLayout::add(std::string name, std::size_t rows, std::size_t cols) {
  const std::size_t offset = size_;
  slots_.push_back({std::move(name), offset, rows, cols});
  size_ += rows * cols;
  return offset;
}

const ParamSlot& ParameterLayout::slot(std::string_view name) const {
  for (const auto& s : slots_) {
    if (s.name == name) return s;
  }
  throw ArgumentError("no parameter named " + std::string(name));
}

namespace {

// ---- dense kernels (row-major) ----

// y = x W + b for `rows` rows; x is rows x in, W is in x out.
void linear(const double* x, std::size_t rows, std::size_t in, const double* w, const double* b,
            std::size_t out, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = y + r * out;
    std::copy(b, b + out, yr);
    const double* xr = x + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      const double* wi = w + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wi[o];
    }
  }
}

// dx += dy W^T
void linear_backward_input(const double* dy, std::size_t rows, std::size_t in, const double* w,
                           std::size_t out, double* dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* dyr = dy + r * out;
    double* dxr = dx + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const double* wi = w + i * out;
      double acc = 0.0;
      for (std::size_t o = 0; o < out; ++o) acc += dyr[o] * wi[o];
      dxr[i] += acc;
    }
  }
}

// dW += x^T dy, db += column sums of dy
void linear_backward_params(const double* x, const double* dy, std::size_t rows, std::size_t in,
                            std::size_t out, double* dw, double* db) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * in;
    const double* dyr = dy + r * out;
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      double* dwi = dw + i * out;
      for (std::size_t o = 0; o < out; ++o) dwi[o] += xi * dyr[o];
    }
    for (std::size_t o = 0; o < out; ++o) db[o] += dyr[o];
  }
}

constexpr double kLayerNormEps = 1e-5;

void layer_norm(const double* x, std::size_t rows, std::size_t width, const double* gamma,
                const double* beta, double* xhat, double* rstd, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * width;
    double mean = 0.0;
    for (std::size_t i = 0; i < width; ++i) mean += xr[i];
    mean /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t i = 0; i < width; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= static_cast<double>(width);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    rstd[r] = inv;
    for (std::size_t i = 0; i < width; ++i) {
      const double h = (xr[i] - mean) * inv;
      xhat[r * width + i] = h;
      y[r * width + i] = h * gamma[i] + beta[i];
    }
  }
}

// dx += LN backward of dy
void layer_norm_backward(const double* dy, const double* xhat, const double* rstd,
                         std::size_t rows, std::size_t width, const double* gamma, double* dx,
                         double* dgamma, double* dbeta) {
  const double n = static_cast<double>(width);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* dyr = dy + r * width;
    const double* hr = xhat + r * width;
    double mean_d = 0.0;
    double mean_dh = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
      const double d = dyr[i] * gamma[i];
      mean_d += d;
      mean_dh += d * hr[i];
      dgamma[i] += dyr[i] * hr[i];
      dbeta[i] += dyr[i];
    }
    mean_d /= n;
    mean_dh /= n;
    double* dxr = dx + r * width;
    for (std::size_t i = 0; i < width; ++i) {
      dxr[i] += rstd[r] * (dyr[i] * gamma[i] - mean_d - hr[i] * mean_dh);
    }
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)

double gelu(double u) {
  return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + 0.044715 * u * u * u)));
}

double gelu_grad(double u) {
  const double t = std::tanh(kGeluC * (u + 0.044715 * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * u * u);
}

void fill_normal(std::span<double> values, double stddev, Rng& rng) {
  for (double& v : values) v = stddev * rng.normal();
}

// ---- transformer ----

struct LayerOffsets {
  std::size_t ln1_gamma, ln1_beta, wq, bq, wk, bk, wv, bv, wo, bo;
  std::size_t ln2_gamma, ln2_beta, w1, b1, w2, b2;
};

struct LayerCache {
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::vector<double> ln1_hat, ln1_rstd, a;
  std::vector<double> q, k, v;
  std::vector<double> probs;  // heads x rows_out x rows_in
  std::vector<double> ctx;
  std::vector<double> ln2_hat, ln2_rstd, f;
  std::vector<double> u, g;
};

class TransformerTape : public EncoderTape {
 public:
  std::vector<int> tokens;    // with [CLS]
  std::vector<int> segments;  // 0 or 1 per position
  std::vector<LayerCache> layers;
  std::vector<double> final_hat;
  double final_rstd = 0.0;
};

class TransformerEncoder final : public Encoder {
 public:
  TransformerEncoder(const EncoderConfig& config, std::size_t vocab_size, ParameterLayout& layout)
      : config_(config), vocab_size_(vocab_size) {
    const auto h = static_cast<std::size_t>(config.hidden_size);
    const auto f = static_cast<std::size_t>(config.ffn_size);
    token_embedding_ = layout.add("encoder.embed.token", vocab_size, h);
    position_embedding_ =
        layout.add("encoder.embed.position", static_cast<std::size_t>(config.max_sequence_length), h);
    segment_embedding_ = layout.add("encoder.embed.segment", 2, h);
    for (int l = 0; l < config.num_layers; ++l) {
      const std::string p = "encoder.layer" + std::to_string(l) + ".";
      LayerOffsets o{};
      o.ln1_gamma = layout.add(p + "ln1.gamma", 1, h);
      o.ln1_beta = layout.add(p + "ln1.beta", 1, h);
      o.wq = layout.add(p + "attn.wq", h, h);
      o.bq = layout.add(p + "attn.bq", 1, h);
      o.wk = layout.add(p + "attn.wk", h, h);
      o.bk = layout.add(p + "attn.bk", 1, h);
      o.wv = layout.add(p + "attn.wv", h, h);
      o.bv = layout.add(p + "attn.bv", 1, h);
      o.wo = layout.add(p + "attn.wo", h, h);
      o.bo = layout.add(p + "attn.bo", 1, h);
      o.ln2_gamma = layout.add(p + "ln2.gamma", 1, h);
      o.ln2_beta = layout.add(p + "ln2.beta", 1, h);
      o.w1 = layout.add(p + "ffn.w1", h, f);
      o.b1 = layout.add(p + "ffn.b1", 1, f);
      o.w2 = layout.add(p + "ffn.w2", f, h);
      o.b2 = layout.add(p + "ffn.b2", 1, h);
      layers_.push_back(o);
    }
    final_gamma_ = layout.add("encoder.final_ln.gamma", 1, h);
    final_beta_ = layout.add("encoder.final_ln.beta", 1, h);
  }

  const EncoderConfig& config() const override { return config_; }

  void initialize(std::span<double> params, Rng& rng) const override {
    const auto h = static_cast<std::size_t>(config_.hidden_size);
    const auto f = static_cast<std::size_t>(config_.ffn_size);
    const auto l = static_cast<std::size_t>(config_.max_sequence_length);
    fill_normal(params.subspan(token_embedding_, vocab_size_ * h), 1.0, rng);
    fill_normal(params.subspan(position_embedding_, l * h), 0.1, rng);
    fill_normal(params.subspan(segment_embedding_, 2 * h), 1.0, rng);
    const double wscale = 1.0 / std::sqrt(static_cast<double>(h));
    const double wscale_ffn = 1.0 / std::sqrt(static_cast<double>(f));
    // Residual projections start smaller so the stack begins close to identity.
    const double residual_scale = 1.0 / std::sqrt(2.0 * config_.num_layers);
    for (const LayerOffsets& o : layers_) {
      std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(o.ln1_gamma), h, 1.0);
      std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(o.ln1_beta), h, 0.0);
      std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(o.ln2_gamma), h, 1.0);
      std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(o.ln2_beta), h, 0.0);
      fill_normal(params.subspan(o.wq, h * h), wscale, rng);
      fill_normal(params.subspan(o.wk, h * h), wscale, rng);
      fill_normal(params.subspan(o.wv, h * h), wscale, rng);
      fill_normal(params.subspan(o.wo, h * h), wscale * residual_scale, rng);
      fill_normal(params.subspan(o.w1, h * f), wscale, rng);
      fill_normal(params.subspan(o.w2, f * h), wscale_ffn * residual_scale, rng);
      for (const std::size_t bias : {o.bq, o.bk, o.bv, o.bo, o.b2}) {
        std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(bias), h, 0.0);
      }
      std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(o.b1), f, 0.0);
    }
    std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(final_gamma_), h, 1.0);
    std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(final_beta_), h, 0.0);
  }

  std::vector<double> encode(std::span<const double> params,
                             const InputSequence& input) const override {
    return forward(params, input)->pooled;
  }

  std::unique_ptr<EncoderTape> forward(std::span<const double> params,
                                       const InputSequence& input) const override {
    const auto h = static_cast<std::size_t>(config_.hidden_size);
    const auto ffn = static_cast<std::size_t>(config_.ffn_size);
    const auto heads = static_cast<std::size_t>(config_.num_heads);
    const std::size_t head_dim = h / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    const std::size_t length = input.token_ids.size() + 1;
    if (length > static_cast<std::size_t>(config_.max_sequence_length)) {
      throw ArgumentError("input of " + std::to_string(length) +
                          " positions exceeds max_sequence_length " +
                          std::to_string(config_.max_sequence_length));
    }
    const double* p = params.data();

    auto tape = std::make_unique<TransformerTape>();
    tape->tokens.reserve(length);
    tape->tokens.push_back(Tokenizer::kCls);
    tape->segments.push_back(0);
    for (std::size_t i = 0; i < input.token_ids.size(); ++i) {
      const int id = input.token_ids[i];
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) {
        throw ArgumentError("token id " + std::to_string(id) + " outside the vocabulary");
      }
      tape->tokens.push_back(id);
      tape->segments.push_back(i <= input.separator_index ? 0 : 1);
    }

    std::vector<double> x(length * h);
    for (std::size_t t = 0; t < length; ++t) {
      const double* te = p + token_embedding_ + static_cast<std::size_t>(tape->tokens[t]) * h;
      const double* pe = p + position_embedding_ + t * h;
      const double* se = p + segment_embedding_ + static_cast<std::size_t>(tape->segments[t]) * h;
      for (std::size_t i = 0; i < h; ++i) x[t * h + i] = te[i] + pe[i] + se[i];
    }

    std::size_t rows = length;
    tape->layers.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const LayerOffsets& o = layers_[l];
      LayerCache& c = tape->layers[l];
      // Only the [CLS] row feeds the pooled output, so the last layer computes just that row.
      const std::size_t rows_out = (l + 1 == layers_.size()) ? 1 : rows;
      c.rows_in = rows;
      c.rows_out = rows_out;

      c.ln1_hat.resize(rows * h);
      c.ln1_rstd.resize(rows);
      c.a.resize(rows * h);
      layer_norm(x.data(), rows, h, p + o.ln1_gamma, p + o.ln1_beta, c.ln1_hat.data(),
                 c.ln1_rstd.data(), c.a.data());

      c.q.resize(rows_out * h);
      c.k.resize(rows * h);
      c.v.resize(rows * h);
      linear(c.a.data(), rows_out, h, p + o.wq, p + o.bq, h, c.q.data());
      linear(c.a.data(), rows, h, p + o.wk, p + o.bk, h, c.k.data());
      linear(c.a.data(), rows, h, p + o.wv, p + o.bv, h, c.v.data());

      c.probs.assign(heads * rows_out * rows, 0.0);
      c.ctx.assign(rows_out * h, 0.0);
      for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::size_t off = hd * head_dim;
        for (std::size_t i = 0; i < rows_out; ++i) {
          double* pr = c.probs.data() + (hd * rows_out + i) * rows;
          const double* qi = c.q.data() + i * h + off;
          double max_score = -1e300;
          for (std::size_t j = 0; j < rows; ++j) {
            const double* kj = c.k.data() + j * h + off;
            double s = 0.0;
            for (std::size_t d = 0; d < head_dim; ++d) s += qi[d] * kj[d];
            pr[j] = s * scale;
            max_score = std::max(max_score, pr[j]);
          }
          double total = 0.0;
          for (std::size_t j = 0; j < rows; ++j) {
            pr[j] = std::exp(pr[j] - max_score);
            total += pr[j];
          }
          double* ci = c.ctx.data() + i * h + off;
          for (std::size_t j = 0; j < rows; ++j) {
            pr[j] /= total;
            const double* vj = c.v.data() + j * h + off;
            for (std::size_t d = 0; d < head_dim; ++d) ci[d] += pr[j] * vj[d];
          }
        }
      }

      std::vector<double> x1(rows_out * h);
      linear(c.ctx.data(), rows_out, h, p + o.wo, p + o.bo, h, x1.data());
      for (std::size_t i = 0; i < rows_out * h; ++i) x1[i] += x[i];

      c.ln2_hat.resize(rows_out * h);
      c.ln2_rstd.resize(rows_out);
      c.f.resize(rows_out * h);
      layer_norm(x1.data(), rows_out, h, p + o.ln2_gamma, p + o.ln2_beta, c.ln2_hat.data(),
                 c.ln2_rstd.data(), c.f.data());
      c.u.resize(rows_out * ffn);
      c.g.resize(rows_out * ffn);
      linear(c.f.data(), rows_out, h, p + o.w1, p + o.b1, ffn, c.u.data());
      for (std::size_t i = 0; i < c.u.size(); ++i) c.g[i] = gelu(c.u[i]);
      std::vector<double> x2(rows_out * h);
      linear(c.g.data(), rows_out, ffn, p + o.w2, p + o.b2, h, x2.data());
      for (std::size_t i = 0; i < rows_out * h; ++i) x2[i] += x1[i];

      x = std::move(x2);
      rows = rows_out;
    }

    tape->final_hat.resize(h);
    tape->pooled.resize(h);
    layer_norm(x.data(), 1, h, p + final_gamma_, p + final_beta_, tape->final_hat.data(),
               &tape->final_rstd, tape->pooled.data());
    return tape;
  }

  void backward(std::span<const double> params, const EncoderTape& base_tape,
                std::span<const double> grad_pooled, std::span<double> grad) const override {
    const auto& tape = static_cast<const TransformerTape&>(base_tape);
    const auto h = static_cast<std::size_t>(config_.hidden_size);
    const auto ffn = static_cast<std::size_t>(config_.ffn_size);
    const auto heads = static_cast<std::size_t>(config_.num_heads);
    const std::size_t head_dim = h / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    const double* p = params.data();
    double* gp = grad.data();

    std::vector<double> dx(h, 0.0);
    layer_norm_backward(grad_pooled.data(), tape.final_hat.data(), &tape.final_rstd, 1, h,
                        p + final_gamma_, dx.data(), gp + final_gamma_, gp + final_beta_);

    for (std::size_t l = layers_.size(); l-- > 0;) {
      const LayerOffsets& o = layers_[l];
      const LayerCache& c = tape.layers[l];
      const std::size_t rows = c.rows_in;
      const std::size_t rows_out = c.rows_out;

      // Feed-forward block: x2 = x1 + W2 gelu(W1 LN2(x1)).
      std::vector<double> dx1 = dx;
      linear_backward_params(c.g.data(), dx.data(), rows_out, ffn, h, gp + o.w2, gp + o.b2);
      std::vector<double> du(rows_out * ffn, 0.0);
      linear_backward_input(dx.data(), rows_out, ffn, p + o.w2, h, du.data());
      for (std::size_t i = 0; i < du.size(); ++i) du[i] *= gelu_grad(c.u[i]);
      linear_backward_params(c.f.data(), du.data(), rows_out, h, ffn, gp + o.w1, gp + o.b1);
      std::vector<double> df(rows_out * h, 0.0);
      linear_backward_input(du.data(), rows_out, h, p + o.w1, ffn, df.data());
      layer_norm_backward(df.data(), c.ln2_hat.data(), c.ln2_rstd.data(), rows_out, h,
                          p + o.ln2_gamma, dx1.data(), gp + o.ln2_gamma, gp + o.ln2_beta);

      // Attention block: x1 = x + Wo attn(LN1(x)).
      linear_backward_params(c.ctx.data(), dx1.data(), rows_out, h, h, gp + o.wo, gp + o.bo);
      std::vector<double> dctx(rows_out * h, 0.0);
      linear_backward_input(dx1.data(), rows_out, h, p + o.wo, h, dctx.data());

      std::vector<double> dq(rows_out * h, 0.0);
      std::vector<double> dk(rows * h, 0.0);
      std::vector<double> dv(rows * h, 0.0);
      std::vector<double> dp(rows);
      for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::size_t off = hd * head_dim;
        for (std::size_t i = 0; i < rows_out; ++i) {
          const double* pr = c.probs.data() + (hd * rows_out + i) * rows;
          const double* dci = dctx.data() + i * h + off;
          double weighted = 0.0;
          for (std::size_t j = 0; j < rows; ++j) {
            const double* vj = c.v.data() + j * h + off;
            double* dvj = dv.data() + j * h + off;
            double s = 0.0;
            for (std::size_t d = 0; d < head_dim; ++d) {
              s += dci[d] * vj[d];
              dvj[d] += pr[j] * dci[d];
            }
            dp[j] = s;
            weighted += pr[j] * s;
          }
          const double* qi = c.q.data() + i * h + off;
          double* dqi = dq.data() + i * h + off;
          for (std::size_t j = 0; j < rows; ++j) {
            const double ds = pr[j] * (dp[j] - weighted) * scale;
            const double* kj = c.k.data() + j * h + off;
            double* dkj = dk.data() + j * h + off;
            for (std::size_t d = 0; d < head_dim; ++d) {
              dqi[d] += ds * kj[d];
              dkj[d] += ds * qi[d];
            }
          }
        }
      }

      std::vector<double> da(rows * h, 0.0);
      linear_backward_params(c.a.data(), dq.data(), rows_out, h, h, gp + o.wq, gp + o.bq);
      linear_backward_input(dq.data(), rows_out, h, p + o.wq, h, da.data());
      linear_backward_params(c.a.data(), dk.data(), rows, h, h, gp + o.wk, gp + o.bk);
      linear_backward_input(dk.data(), rows, h, p + o.wk, h, da.data());
      linear_backward_params(c.a.data(), dv.data(), rows, h, h, gp + o.wv, gp + o.bv);
      linear_backward_input(dv.data(), rows, h, p + o.wv, h, da.data());

      std::vector<double> dx_prev(rows * h, 0.0);
      for (std::size_t i = 0; i < rows_out * h; ++i) dx_prev[i] = dx1[i];
      layer_norm_backward(da.data(), c.ln1_hat.data(), c.ln1_rstd.data(), rows, h,
                          p + o.ln1_gamma, dx_prev.data(), gp + o.ln1_gamma, gp + o.ln1_beta);
      dx = std::move(dx_prev);
    }

    for (std::size_t t = 0; t < tape.tokens.size(); ++t) {
      double* te = gp + token_embedding_ + static_cast<std::size_t>(tape.tokens[t]) * h;
      double* pe = gp + position_embedding_ + t * h;
      double* se = gp + segment_embedding_ + static_cast<std::size_t>(tape.segments[t]) * h;
      for (std::size_t i = 0; i < h; ++i) {
        const double d = dx[t * h + i];
        te[i] += d;
        pe[i] += d;
        se[i] += d;
      }
    }
  }

 private:
  EncoderConfig config_;
  std::size_t vocab_size_;
  std::size_t token_embedding_ = 0;
  std::size_t position_embedding_ = 0;
  std::size_t segment_embedding_ = 0;
  std::vector<LayerOffsets> layers_;
  std::size_t final_gamma_ = 0;
  std::size_t final_beta_ = 0;
};

// ---- bag of embeddings ----

class BagTape : public EncoderTape {
 public:
  std::vector<int> tokens;
};

class BagOfEmbeddingsEncoder final : public Encoder {
 public:
  BagOfEmbeddingsEncoder(const EncoderConfig& config, std::size_t vocab_size,
                         ParameterLayout& layout)
      : config_(config), vocab_size_(vocab_size) {
    embedding_ = layout.add("encoder.embed.token", vocab_size,
                            static_cast<std::size_t>(config.hidden_size));
  }

  const EncoderConfig& config() const override { return config_; }

  void initialize(std::span<double> params, Rng& rng) const override {
    const auto h = static_cast<std::size_t>(config_.hidden_size);
    fill_normal(params.subspan(embedding_, vocab_size_ * h), 1.0 / std::sqrt(static_cast<double>(h)),
                rng);
  }

  std::vector<double> encode(std::span<const double> params,
                             const InputSequence& input) const override {
    return forward(params, input)->pooled;
  }

  std::unique_ptr<EncoderTape> forward(std::span<const double> params,
                                       const InputSequence& input) const override {
    const auto h = static_cast<std::size_t>(config_.hidden_size);
    if (input.token_ids.size() + 1 > static_cast<std::size_t>(config_.max_sequence_length)) {
      throw ArgumentError("input exceeds max_sequence_length");
    }
    auto tape = std::make_unique<BagTape>();
    tape->tokens = input.token_ids;
    tape->pooled.assign(h, 0.0);
    if (tape->tokens.empty()) return tape;
    const double inv = 1.0 / static_cast<double>(tape->tokens.size());
    for (const int id : tape->tokens) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) {
        throw ArgumentError("token id " + std::to_string(id) + " outside the vocabulary");
      }
      const double* e = params.data() + embedding_ + static_cast<std::size_t>(id) * h;
      for (std::size_t i = 0; i < h; ++i) tape->pooled[i] += inv * e[i];
    }
    return tape;
  }

  void backward(std::span<const double>, const EncoderTape& base_tape,
                std::span<const double> grad_pooled, std::span<double> grad) const override {
    const auto& tape = static_cast<const BagTape&>(base_tape);
    const auto h = static_cast<std::size_t>(config_.hidden_size);
    if (tape.tokens.empty()) return;
    const double inv = 1.0 / static_cast<double>(tape.tokens.size());
    for (const int id : tape.tokens) {
      double* e = grad.data() + embedding_ + static_cast<std::size_t>(id) * h;
      for (std::size_t i = 0; i < h; ++i) e[i] += inv * grad_pooled[i];
    }
  }

 private:
  EncoderConfig config_;
  std::size_t vocab_size_;
  std::size_t embedding_ = 0;
};

}  // namespace

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config, std::size_t vocab_size,
                                      ParameterLayout& layout) {
  config.validate();
  if (config.kind == EncoderKind::kBagOfEmbeddings) {
    return std::make_unique<BagOfEmbeddingsEncoder>(config, vocab_size, layout);
  }
  return std::make_unique<TransformerEncoder>(config, vocab_size, layout);
}

}  // namespace cpft
