// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "cpft/errors.hpp"
#include "cpft/metrics.hpp"
#include "cpft/rng.hpp"

namespace cpft {

std::string_view to_string(CheckpointSelection selection) {
  return selection == CheckpointSelection::kMaxDevQwk ? "max_dev_qwk" : "last_epoch";
}

CheckpointSelection parse_checkpoint_selection(std::string_view text) {
  if (text == "max_dev_qwk") return CheckpointSelection::kMaxDevQwk;
  if (text == "last_epoch") return CheckpointSelection::kLastEpoch;
  throw ConfigError("unknown checkpoint_selection \"" + std::string(text) + "\"");
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "adam") return OptimizerKind::kAdam;
  if (text == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer \"" + std::string(text) + "\"");
}

void TrainConfig::validate(bool allow_default_epochs) const {
  if (epochs < (allow_default_epochs ? 0 : 1)) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a finite non-negative number");
  }
}

std::string TrainConfig::canonical() const {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer),
                "epochs=%d;batch=%d;lr=%.17g;seed=%llu;opt=%s;select=%s;b1=%.17g;b2=%.17g;eps=%."
                "17g",
                epochs, batch_size, learning_rate, static_cast<unsigned long long>(seed),
                std::string(to_string(optimizer)).c_str(),
                std::string(to_string(checkpoint_selection)).c_str(), adam_beta1, adam_beta2,
                adam_epsilon);
  return buffer;
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty() || predictions.size() != targets.size()) {
    throw ArgumentError("mse_loss needs equal non-zero lengths");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = targets[i] - predictions[i];
    total += d * d;
  }
  return total / static_cast<double>(predictions.size());
}

int select_checkpoint(std::span<const EpochRecord> history, CheckpointSelection selection) {
  if (history.empty()) throw ArgumentError("select_checkpoint: empty history");
  if (selection == CheckpointSelection::kLastEpoch) return history.back().epoch;
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    // Strict comparison keeps the earliest epoch on ties.
    if (history[i].dev_qwk > history[best].dev_qwk ||
        (std::isnan(history[best].dev_qwk) && !std::isnan(history[i].dev_qwk))) {
      best = i;
    }
  }
  return history[best].epoch;
}

double dev_qwk(const ScoringModel& model, std::span<const Example> dev) {
  if (dev.empty()) return std::numeric_limits<double>::quiet_NaN();
  struct Ratings {
    std::vector<int> gold;
    std::vector<int> pred;
    int max_score = 1;
  };
  std::map<std::string, Ratings> by_prompt;
  for (const Example& example : dev) {
    Ratings& r = by_prompt[example.input.prompt_id];
    r.max_score = example.max_score;
    r.gold.push_back(static_cast<int>(std::lround(example.target * example.max_score)));
    r.pred.push_back(rescale_to_raw(model.predict_score(example.input), example.max_score));
  }
  double total = 0.0;
  for (const auto& [id, r] : by_prompt) {
    total += qwk(r.gold, r.pred, 0, r.max_score);
  }
  return total / static_cast<double>(by_prompt.size());
}

std::vector<Example> make_examples(const ScoringModel& model, const Dataset& dataset,
                                   std::span<const Answer> answers, InputMode mode) {
  std::vector<Example> examples;
  examples.reserve(answers.size());
  for (const Answer& answer : answers) {
    const Prompt& prompt = dataset.prompt(answer.prompt_id);
    examples.push_back({model.build_input(prompt, answer.text, mode),
                        normalize_score(answer.raw_score, prompt.max_score), prompt.max_score});
  }
  return examples;
}

namespace {

class Optimizer {
 public:
  Optimizer(const TrainConfig& config, std::size_t size) : config_(config) {
    if (config.optimizer == OptimizerKind::kAdam) {
      m_.assign(size, 0.0);
      v_.assign(size, 0.0);
    }
  }

  void step(std::span<double> params, std::span<const double> grad) {
    const double lr = config_.learning_rate;
    if (config_.optimizer == OptimizerKind::kSgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
      return;
    }
    ++t_;
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.adam_epsilon);
    }
  }

 private:
  TrainConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long long t_ = 0;
};

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

TrainedArtifact train(ScoringModel model, std::span<const Example> train_data,
                      std::span<const Example> dev_data, const TrainConfig& config,
                      InputMode mode, const TrainHooks& hooks) {
  config.validate();
  if (train_data.empty()) throw ArgumentError("train: empty training data");
  if (config.checkpoint_selection == CheckpointSelection::kMaxDevQwk && dev_data.empty() &&
      !hooks.dev_metric) {
    throw ArgumentError("train: max_dev_qwk selection needs dev data");
  }

  std::set<std::string> prompts;
  for (const Example& example : train_data) prompts.insert(example.input.prompt_id);

  const std::size_t n = train_data.size();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config.seed, "train/shuffle"));
  Optimizer optimizer(config, model.parameters().size());
  std::vector<double> grad(model.parameters().size());

  std::vector<EpochRecord> history;
  std::vector<double> best_params;
  double best_dev = -std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      ++batch_index;
      const std::size_t end = std::min(n, start + batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const Example& example = train_data[order[b]];
        const ScoringModel::ForwardPass pass = model.forward(example.input);
        const double error = pass.prediction - example.target;
        batch_loss += error * error;
        model.backward(pass, 2.0 * error * scale, grad);
      }
      if (!std::isfinite(batch_loss)) throw DivergenceError(epoch, batch_index);
      loss_sum += batch_loss;
      optimizer.step(model.parameters(), grad);
      if (!all_finite(model.parameters())) throw DivergenceError(epoch, batch_index);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.dev_qwk = hooks.dev_metric ? hooks.dev_metric(model, epoch) : dev_qwk(model, dev_data);
    history.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);

    if (config.checkpoint_selection == CheckpointSelection::kMaxDevQwk &&
        (record.dev_qwk > best_dev || best_params.empty())) {
      best_dev = record.dev_qwk;
      best_params.assign(model.parameters().begin(), model.parameters().end());
    }
  }

  const int selected = select_checkpoint(history, config.checkpoint_selection);
  if (config.checkpoint_selection == CheckpointSelection::kMaxDevQwk) {
    std::copy(best_params.begin(), best_params.end(), model.parameters().begin());
  }
  model.add_trained_prompts(prompts);
  model.metadata()["input_mode"] = std::string(to_string(mode));
  return TrainedArtifact{std::move(model), mode, std::move(history), selected};
}

TrainedArtifact pre_finetune(const Dataset& pool, ScoringModel fresh, TrainConfig config,
                             InputMode mode, const TrainHooks& hooks) {
  if (config.epochs == 0) config.epochs = kPreFinetuneEpochs;
  std::vector<Answer> train_answers =
      pool.has_splits() ? pool.answers_in(Split::kTrain) : pool.answers();
  if (train_answers.empty()) throw ArgumentError("pre_finetune: pool has no training answers");
  const std::vector<Answer> dev_answers =
      pool.has_splits() ? pool.answers_in(Split::kDev) : std::vector<Answer>{};
  const std::vector<Example> train_data = make_examples(fresh, pool, train_answers, mode);
  const std::vector<Example> dev_data = make_examples(fresh, pool, dev_answers, mode);
  return train(std::move(fresh), train_data, dev_data, config, mode, hooks);
}

TrainedArtifact pre_finetune(const Dataset& pool, const EncoderConfig& encoder_config,
                             std::shared_ptr<const Tokenizer> tokenizer, TrainConfig config,
                             InputMode mode, const TrainHooks& hooks) {
  ScoringModel fresh = ScoringModel::create(encoder_config, std::move(tokenizer),
                                            derive_seed(config.seed, "init/pre-finetune"));
  return pre_finetune(pool, std::move(fresh), config, mode, hooks);
}

std::vector<Answer> subsample_train(const Dataset& target, std::string_view prompt_id,
                                    int n_train, std::uint64_t seed) {
  std::vector<Answer> pool = target.answers_for(prompt_id, Split::kTrain);
  if (n_train < 1 || static_cast<std::size_t>(n_train) > pool.size()) {
    throw SizingError("prompt " + std::string(prompt_id) + " has " +
                      std::to_string(pool.size()) + " training answers, requested " +
                      std::to_string(n_train));
  }
  Rng rng(derive_seed(seed, "subsample/" + std::string(prompt_id)));
  rng.shuffle(std::span<Answer>(pool));
  pool.resize(static_cast<std::size_t>(n_train));
  return pool;
}

TrainedArtifact finetune(ScoringModel start, StartingPoint starting_point, const Dataset& target,
                         std::string_view prompt_id, int n_train, TrainConfig config,
                         InputMode mode, std::uint64_t subsample_seed, const TrainHooks& hooks) {
  if (config.epochs == 0) {
    config.epochs = starting_point == StartingPoint::kPreFinetuned
                        ? kFinetuneEpochsAfterPreFinetune
                        : kFinetuneEpochsFromScratch;
  }
  const std::vector<Answer> train_answers =
      subsample_train(target, prompt_id, n_train, subsample_seed);
  const std::vector<Answer> dev_answers = target.answers_for(prompt_id, Split::kDev);
  const std::vector<Example> train_data = make_examples(start, target, train_answers, mode);
  const std::vector<Example> dev_data = make_examples(start, target, dev_answers, mode);
  return train(std::move(start), train_data, dev_data, config, mode, hooks);
}

void write_metrics_csv(const TrainedArtifact& artifact, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,train_loss,dev_qwk\n";
  char line[128];
  for (const EpochRecord& record : artifact.history) {
    std::snprintf(line, sizeof(line), "%d,%.10g,%.10g\n", record.epoch, record.train_loss,
                  record.dev_qwk);
    out << line;
  }
}

}  // namespace cpft
