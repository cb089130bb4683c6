// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cpft/corpus.hpp"
#include "cpft/experiments.hpp"
#include "cpft/metrics.hpp"
#include "cpft/synthetic.hpp"
#include "cpft/training.hpp"

namespace cpft {

/// Everything a CLI run needs besides data paths. Stored as a JSON tree; absent
/// keys keep their defaults, unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string delimiter = ", ";
  CueAggregation cue_aggregation = CueAggregation::kMinOverPhrases;
  EncoderConfig encoder{};
  TrainConfig pre_finetune{.epochs = kPreFinetuneEpochs,
                           .checkpoint_selection = CheckpointSelection::kLastEpoch};
  TrainConfig finetune{};
  SplitSizes pool_split{.train = 180, .dev = 20, .test = 0};
  SplitSizes target_split{};
  std::uint64_t split_seed = 0;
  /// Prompts held out as finetuning targets; every other prompt forms the pool.
  std::vector<std::string> target_prompts;
  SweepConfig sweep{};

  /// Throws ConfigError.
  void validate() const;
  ExperimentConfig experiment_config() const;
};

RunConfig run_config_from_json(std::string_view text);
std::string run_config_to_json(const RunConfig& config);
/// Throws ConfigError when unreadable or malformed.
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

std::string train_config_to_json(const TrainConfig& config);

/// Parses and validates a synthetic corpus spec. Throws ConfigError on malformed
/// JSON or unknown keys and ValidationError on out-of-range values.
SyntheticSpec synthetic_spec_from_json(std::string_view text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

}  // namespace cpft
