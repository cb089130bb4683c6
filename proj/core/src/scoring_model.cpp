// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/scoring_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "cpft/errors.hpp"
#include "json_io.hpp"

namespace cpft {
namespace {

using detail::Json;

double stable_sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  // Keep the open interval even where the exponential saturates.
  return std::clamp(s, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace

ScoringModel::ScoringModel(std::shared_ptr<const Encoder> encoder,
                           std::shared_ptr<const ParameterLayout> layout, InputBuilder builder)
    : encoder_(std::move(encoder)), layout_(std::move(layout)), builder_(std::move(builder)) {
  params_.assign(layout_->size(), 0.0);
  head_w_ = layout_->slot("head.w").offset;
  head_b_ = layout_->slot("head.b").offset;
}

ScoringModel ScoringModel::create(const EncoderConfig& config,
                                  std::shared_ptr<const Tokenizer> tokenizer,
                                  std::uint64_t init_seed, std::string delimiter) {
  config.validate();
  std::optional<ScoringModel> pretrained;
  if (config.kind == EncoderKind::kPretrainedTransformer) {
    pretrained = load(config.pretrained_path);
    const EncoderConfig& stored = pretrained->encoder_config();
    if (stored.hidden_size != config.hidden_size || stored.num_layers != config.num_layers ||
        stored.num_heads != config.num_heads || stored.ffn_size != config.ffn_size ||
        stored.max_sequence_length != config.max_sequence_length) {
      throw ConfigError("pretrained checkpoint " + config.pretrained_path +
                        " does not match the requested encoder shape");
    }
    tokenizer = pretrained->shared_tokenizer();
  }
  if (!tokenizer) throw ConfigError("ScoringModel::create needs a tokenizer");

  auto layout = std::make_shared<ParameterLayout>();
  std::shared_ptr<const Encoder> encoder = make_encoder(config, tokenizer->size(), *layout);
  layout->add("head.w", 1, static_cast<std::size_t>(config.hidden_size));
  layout->add("head.b", 1, 1);
  ScoringModel model(std::move(encoder), std::move(layout),
                     InputBuilder(tokenizer, config.max_sequence_length, std::move(delimiter)));

  Rng rng(init_seed);
  model.encoder_->initialize(model.params_, rng);
  const double head_scale = 0.1 / std::sqrt(static_cast<double>(config.hidden_size));
  for (std::size_t i = 0; i < static_cast<std::size_t>(config.hidden_size); ++i) {
    model.params_[model.head_w_ + i] = head_scale * rng.normal();
  }
  model.params_[model.head_b_] = 0.0;

  if (pretrained) {
    // Encoder slots line up because the architecture and vocabulary are identical.
    for (const ParamSlot& slot : model.layout_->slots()) {
      if (slot.name.rfind("encoder.", 0) != 0) continue;
      const ParamSlot& source = pretrained->layout().slot(slot.name);
      std::copy_n(pretrained->params_.begin() + static_cast<std::ptrdiff_t>(source.offset),
                  slot.size(), model.params_.begin() + static_cast<std::ptrdiff_t>(slot.offset));
    }
  }
  return model;
}

std::vector<double> ScoringModel::encode(const InputSequence& input) const {
  return encoder_->encode(params_, input);
}

double ScoringModel::predict_score(const InputSequence& input) const {
  const std::vector<double> h = encode(input);
  double z = params_[head_b_];
  for (std::size_t i = 0; i < h.size(); ++i) z += params_[head_w_ + i] * h[i];
  return stable_sigmoid(z);
}

ScoringModel::ForwardPass ScoringModel::forward(const InputSequence& input) const {
  ForwardPass pass;
  pass.tape = encoder_->forward(params_, input);
  const std::vector<double>& h = pass.tape->pooled;
  double z = params_[head_b_];
  for (std::size_t i = 0; i < h.size(); ++i) z += params_[head_w_ + i] * h[i];
  pass.prediction = stable_sigmoid(z);
  return pass;
}

void ScoringModel::backward(const ForwardPass& pass, double grad_prediction,
                            std::span<double> grad) const {
  const double s = pass.prediction;
  const double dz = grad_prediction * s * (1.0 - s);
  const std::vector<double>& h = pass.tape->pooled;
  std::vector<double> dh(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    grad[head_w_ + i] += dz * h[i];
    dh[i] = dz * params_[head_w_ + i];
  }
  grad[head_b_] += dz;
  encoder_->backward(params_, *pass.tape, dh, grad);
}

std::span<const double> ScoringModel::head_weights() const {
  return std::span<const double>(params_).subspan(head_w_,
                                                  static_cast<std::size_t>(hidden_size()));
}

double ScoringModel::head_bias() const { return params_[head_b_]; }

void ScoringModel::set_head(std::span<const double> weights, double bias) {
  if (weights.size() != static_cast<std::size_t>(hidden_size())) {
    throw ArgumentError("head weight length must equal hidden size");
  }
  std::copy(weights.begin(), weights.end(),
            params_.begin() + static_cast<std::ptrdiff_t>(head_w_));
  params_[head_b_] = bias;
}

void ScoringModel::add_trained_prompts(const std::set<std::string>& prompt_ids) {
  trained_prompts_.insert(prompt_ids.begin(), prompt_ids.end());
}

void ScoringModel::save(const std::filesystem::path& path) const {
  Json j;
  j["format"] = "cpft-checkpoint";
  j["format_version"] = kCheckpointFormatVersion;
  j["encoder"] = detail::encoder_to_json(encoder_config());
  j["tokenizer"] = {{"delimiter", builder_.delimiter()},
                    {"vocabulary", tokenizer().vocabulary()}};
  j["metadata"] = metadata_;
  j["trained_prompts"] = trained_prompts_;
  const auto w = head_weights();
  j["head"] = {{"w", std::vector<double>(w.begin(), w.end())}, {"b", head_bias()}};
  Json parameters = Json::array();
  for (const ParamSlot& slot : layout_->slots()) {
    if (slot.name.rfind("head.", 0) == 0) continue;
    const auto begin = params_.begin() + static_cast<std::ptrdiff_t>(slot.offset);
    parameters.push_back({{"name", slot.name},
                          {"rows", slot.rows},
                          {"cols", slot.cols},
                          {"values", std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(
                                                                            slot.size()))}});
  }
  j["parameters"] = std::move(parameters);

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
    out << j.dump();
  }
  std::filesystem::rename(tmp, path);
}

ScoringModel ScoringModel::load(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    if (j.value("format", std::string()) != "cpft-checkpoint") {
      throw CheckpointError(path.string() + " is not a cpft checkpoint");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw CheckpointError("unsupported checkpoint format_version " + std::to_string(version));
    }
    EncoderConfig config = detail::encoder_from_json(j.at("encoder"));
    auto tokenizer = std::make_shared<const Tokenizer>(
        j.at("tokenizer").at("vocabulary").get<std::vector<std::string>>());
    const std::string delimiter = j.at("tokenizer").at("delimiter").get<std::string>();

    const auto w = j.at("head").at("w").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(config.hidden_size)) {
      throw CheckpointError("checkpoint head has " + std::to_string(w.size()) +
                            " weights but hidden_size is " + std::to_string(config.hidden_size));
    }

    auto layout = std::make_shared<ParameterLayout>();
    std::shared_ptr<const Encoder> encoder = make_encoder(config, tokenizer->size(), *layout);
    layout->add("head.w", 1, static_cast<std::size_t>(config.hidden_size));
    layout->add("head.b", 1, 1);
    ScoringModel model(std::move(encoder), std::move(layout),
                       InputBuilder(tokenizer, config.max_sequence_length, delimiter));

    std::size_t encoder_slots = 0;
    for (const auto& entry : j.at("parameters")) {
      const std::string name = entry.at("name").get<std::string>();
      const ParamSlot* slot = nullptr;
      try {
        slot = &model.layout_->slot(name);
      } catch (const ArgumentError&) {
        throw CheckpointError("checkpoint has unexpected parameter " + name);
      }
      const auto values = entry.at("values").get<std::vector<double>>();
      if (entry.at("rows").get<std::size_t>() != slot->rows ||
          entry.at("cols").get<std::size_t>() != slot->cols || values.size() != slot->size()) {
        throw CheckpointError("parameter " + name + " has the wrong shape");
      }
      std::copy(values.begin(), values.end(),
                model.params_.begin() + static_cast<std::ptrdiff_t>(slot->offset));
      ++encoder_slots;
    }
    if (encoder_slots + 2 != model.layout_->slots().size()) {
      throw CheckpointError("checkpoint is missing encoder parameters");
    }
    model.set_head(w, j.at("head").at("b").get<double>());
    if (const auto it = j.find("metadata"); it != j.end()) {
      model.metadata_ = it->get<std::map<std::string, std::string>>();
    }
    if (const auto it = j.find("trained_prompts"); it != j.end()) {
      model.trained_prompts_ = it->get<std::set<std::string>>();
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed checkpoint " + path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError("checkpoint " + path.string() + ": " + e.what());
  }
}

ScoringModel ScoringModel::load(const std::filesystem::path& path, const EncoderConfig& expected) {
  ScoringModel model = load(path);
  if (model.hidden_size() != expected.hidden_size) {
    throw CheckpointError("checkpoint hidden size " + std::to_string(model.hidden_size()) +
                          " does not match expected " + std::to_string(expected.hidden_size));
  }
  return model;
}

}  // namespace cpft
