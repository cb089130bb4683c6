// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpft/corpus.hpp"
#include "cpft/encoder.hpp"
#include "cpft/input.hpp"
#include "cpft/scoring_model.hpp"

namespace cpft {

enum class CheckpointSelection { kMaxDevQwk, kLastEpoch };
enum class OptimizerKind { kAdam, kSgd };

std::string_view to_string(CheckpointSelection selection);
CheckpointSelection parse_checkpoint_selection(std::string_view text);
std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view text);

inline constexpr int kPreFinetuneEpochs = 5;
inline constexpr int kFinetuneEpochsAfterPreFinetune = 10;
inline constexpr int kFinetuneEpochsFromScratch = 30;

struct TrainConfig {
  /// 0 selects the stage default (kPreFinetuneEpochs, or the finetune default
  /// for the starting point); train() itself requires >= 1.
  int epochs = 0;
  int batch_size = 8;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  CheckpointSelection checkpoint_selection = CheckpointSelection::kMaxDevQwk;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  /// Throws ConfigError. `allow_default_epochs` accepts epochs == 0.
  void validate(bool allow_default_epochs = false) const;
  /// Stable textual form, used for cache keys.
  std::string canonical() const;
};

/// One training pair: input, normalized target and the prompt's score range
/// (needed to rescale predictions for dev QWK).
struct Example {
  InputSequence input;
  double target = 0.0;
  int max_score = 1;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_qwk = 0.0;  // NaN when no dev set was evaluated
};

struct TrainedArtifact {
  ScoringModel model;
  InputMode mode = InputMode::kKeyPhrase;
  std::vector<EpochRecord> history;
  int selected_epoch = 0;  // 1-based index into history
};

/// Optional callbacks around train().
struct TrainHooks {
  /// Replaces the dev-QWK computation (tests inject fixed sequences through this).
  std::function<double(const ScoringModel&, int epoch)> dev_metric;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// (1/I) sum (target - prediction)^2. Throws ArgumentError on empty or mismatched input.
double mse_loss(std::span<const double> predictions, std::span<const double> targets);

/// 1-based epoch chosen by the policy: the first maximum of dev QWK, or the last epoch.
int select_checkpoint(std::span<const EpochRecord> history, CheckpointSelection selection);

/// QWK per prompt on rescaled integer scores, averaged with equal prompt weights.
/// NaN for an empty dev set.
double dev_qwk(const ScoringModel& model, std::span<const Example> dev);

/// Builds examples for the given answers of `dataset`, scores normalized by each
/// prompt's own max_score.
std::vector<Example> make_examples(const ScoringModel& model, const Dataset& dataset,
                                   std::span<const Answer> answers, InputMode mode);

/// Mini-batch gradient descent on the MSE loss for config.epochs epochs.
///
/// Training order is reshuffled every epoch from config.seed. Dev QWK is
/// recorded after each epoch; with kMaxDevQwk the returned model holds the
/// parameters of the first epoch reaching the maximum. Throws DivergenceError on
/// a non-finite loss or parameter, ArgumentError on empty train data or a
/// missing dev set under kMaxDevQwk.
TrainedArtifact train(ScoringModel model, std::span<const Example> train_data,
                      std::span<const Example> dev_data, const TrainConfig& config,
                      InputMode mode, const TrainHooks& hooks = {});

/// Trains `fresh` on every train-split answer of every prompt in `pool` (all
/// answers when the pool carries no splits), dev QWK on the pool's dev split.
/// Defaults to kPreFinetuneEpochs when config.epochs == 0.
TrainedArtifact pre_finetune(const Dataset& pool, ScoringModel fresh, TrainConfig config,
                             InputMode mode, const TrainHooks& hooks = {});

/// Convenience overload creating the fresh model from an encoder config.
TrainedArtifact pre_finetune(const Dataset& pool, const EncoderConfig& encoder_config,
                             std::shared_ptr<const Tokenizer> tokenizer, TrainConfig config,
                             InputMode mode, const TrainHooks& hooks = {});

enum class StartingPoint { kFresh, kPreFinetuned };

/// The first n_train answers of a seeded shuffle of the target prompt's train split.
/// Throws SizingError when the split is smaller than n_train.
std::vector<Answer> subsample_train(const Dataset& target, std::string_view prompt_id,
                                    int n_train, std::uint64_t seed);

/// Finetunes `start` on `n_train` answers of the target prompt (see
/// subsample_train, seeded with `subsample_seed`), selecting by dev QWK on the
/// target's dev split under the config's policy. config.epochs == 0 selects 10
/// epochs from a pre-finetuned start and 30 from a fresh one.
TrainedArtifact finetune(ScoringModel start, StartingPoint starting_point, const Dataset& target,
                         std::string_view prompt_id, int n_train, TrainConfig config,
                         InputMode mode, std::uint64_t subsample_seed,
                         const TrainHooks& hooks = {});

/// CSV with header "epoch,train_loss,dev_qwk".
void write_metrics_csv(const TrainedArtifact& artifact, const std::filesystem::path& path);

}  // namespace cpft
