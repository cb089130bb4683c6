// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpft/corpus.hpp"
#include "cpft/encoder.hpp"
#include "cpft/input.hpp"
#include "cpft/scoring_model.hpp"
#include "cpft/tokenizer.hpp"
#include "cpft/training.hpp"

namespace cpft {

enum class Setting { kBaseline, kKeyPhrase, kPreFinetune, kPreFinetuneKeyPhrase };

std::string_view to_string(Setting setting);
Setting parse_setting(std::string_view text);
std::vector<Setting> all_settings();
/// kBaseline and kPreFinetune condition on the prompt ID; the others on key phrases.
InputMode input_mode(Setting setting);
bool uses_pre_finetune(Setting setting);

struct RunResult {
  Setting setting = Setting::kBaseline;
  std::string prompt_id;
  int n_train = 0;
  /// Prompts in the pre-finetuning pool for prompt-count sweeps, 0 otherwise.
  int prompt_count = 0;
  std::uint64_t seed = 0;
  double test_qwk = 0.0;
  int selected_epoch = 0;
  std::string pre_finetune_key;  // empty without pre-finetuning
  std::string checkpoint_path;   // empty when the checkpoint was kept in memory
  std::vector<std::string> warnings;

  /// Identity of the cell; two results with equal keys are the same experiment.
  std::string key() const;
  bool operator==(const RunResult&) const = default;
};

struct SweepConfig {
  std::vector<int> finetune_sizes{10, 25, 50, 100, 200};
  int budget = 1600;
  std::vector<int> prompt_counts{1, 2, 4, 8, 16, 32, 64};
  int prompt_count_n_train = 50;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<Setting> settings = all_settings();

  /// Throws ConfigError: positive sizes and counts, budget divisible by every count.
  void validate() const;
};

struct ExperimentConfig {
  EncoderConfig encoder;
  TrainConfig pre_finetune{.epochs = kPreFinetuneEpochs,
                           .checkpoint_selection = CheckpointSelection::kLastEpoch};
  TrainConfig finetune{};  // epochs 0: 10 after pre-finetuning, 30 from scratch
  std::string delimiter = ", ";
  /// Content-addressed pre-finetuned checkpoints live here; empty keeps them in memory only.
  std::filesystem::path cache_dir;
};

/// Pool answers actually used for one pre-finetuning run.
struct PoolSubset {
  Dataset data;  // train split = training answers, dev split = monitoring answers
  std::vector<std::string> warnings;
};

/// Executes settings and sweeps over one pool and one target dataset.
///
/// Both datasets must carry splits. The tokenizer is built once over both so
/// every cell shares a vocabulary. Pre-finetuned models are cached by content
/// key, so concurrent cells needing the same model train it once.
class ExperimentRunner {
 public:
  ExperimentRunner(Dataset pool, Dataset targets, ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const std::shared_ptr<const Tokenizer>& tokenizer() const { return tokenizer_; }
  const Dataset& pool() const { return pool_; }
  const Dataset& targets() const { return targets_; }

  /// Optional pre-finetune, then finetune on n_train target answers, then test QWK.
  RunResult run_setting(Setting setting, std::string_view prompt_id, int n_train,
                        std::uint64_t seed);
  /// As run_setting, pre-finetuning on `subset` instead of the whole pool.
  RunResult run_setting(Setting setting, const PoolSubset& subset, int prompt_count,
                        std::string_view prompt_id, int n_train, std::uint64_t seed);

  /// Pre-finetuned model for (whole pool, mode, seed), trained on first use.
  std::shared_ptr<const ScoringModel> pre_finetuned(InputMode mode, std::uint64_t seed);
  std::shared_ptr<const ScoringModel> pre_finetuned(const Dataset& pool_subset, InputMode mode,
                                                    std::uint64_t seed, std::string* key = nullptr);

  /// Content key of a pre-finetuning run: pool subset, mode, configs, vocabulary, seed.
  std::string pre_finetune_key(const Dataset& pool_subset, InputMode mode,
                               std::uint64_t seed) const;

  /// `count` pool prompts sampled without replacement and budget/count training
  /// answers from each (clipped to availability, with a warning). Throws
  /// SizingError when the pool has fewer than `count` prompts.
  PoolSubset sample_pool(int count, int budget, std::uint64_t seed) const;

  /// Number of pre-finetuning trainings actually executed (cache misses).
  int pre_finetune_runs() const { return pre_finetune_runs_.load(); }

 private:
  struct CacheEntry;

  Dataset pool_;
  Dataset targets_;
  ExperimentConfig config_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  std::mutex cache_mutex_;
  std::map<std::string, std::shared_future<std::shared_ptr<const ScoringModel>>> cache_;
  std::atomic<int> pre_finetune_runs_{0};
};

/// One JSON file per RunResult. Writes are atomic, so concurrent workers and
/// interrupted sweeps leave only complete files.
class ResultsStore {
 public:
  explicit ResultsStore(std::filesystem::path directory);

  const std::filesystem::path& directory() const { return directory_; }
  std::filesystem::path path_for(const RunResult& result) const;
  bool contains(const RunResult& cell) const;
  std::optional<RunResult> find(const RunResult& cell) const;
  void save(const RunResult& result) const;
  /// Every stored result, ordered by file name.
  std::vector<RunResult> load_all() const;

 private:
  std::filesystem::path directory_;
};

std::string result_to_json(const RunResult& result);
RunResult result_from_json(std::string_view text);

struct SweepOptions {
  int workers = 1;
  ResultsStore* store = nullptr;  // cells already present are loaded, not rerun
  std::function<void(const RunResult&)> on_result;
};

/// Cross product settings x targets x sizes x seeds, in that nesting order.
std::vector<RunResult> sweep_finetune_size(ExperimentRunner& runner,
                                           std::span<const Setting> settings,
                                           std::span<const int> sizes,
                                           std::span<const std::uint64_t> seeds,
                                           std::span<const std::string> target_prompts,
                                           const SweepOptions& options = {});

/// For every count and seed, pre-finetunes on sample_pool(count, budget, seed)
/// and finetunes each target on n_train answers. Clip warnings are attached to
/// the results.
std::vector<RunResult> sweep_prompt_count(ExperimentRunner& runner,
                                          std::span<const int> prompt_counts, int budget,
                                          int n_train, std::span<const std::uint64_t> seeds,
                                          std::span<const std::string> target_prompts,
                                          Setting setting = Setting::kPreFinetuneKeyPhrase,
                                          const SweepOptions& options = {});

enum class GroupField { kSetting, kPromptId, kNTrain, kPromptCount, kSeed };

struct AggregateRow {
  std::optional<Setting> setting;
  std::optional<std::string> prompt_id;
  std::optional<int> n_train;
  std::optional<int> prompt_count;
  std::optional<std::uint64_t> seed;
  double mean_qwk = 0.0;
  double std_qwk = 0.0;  // population standard deviation across seeds
  int n_seeds = 0;
  int n_results = 0;
};

/// Groups by `group_by`. Unless kSeed is a group field, results sharing a seed
/// inside a group are first averaged, so mean and std are taken across seeds.
/// Rows are ordered by the group fields (settings in declaration order).
std::vector<AggregateRow> aggregate(std::span<const RunResult> results,
                                    std::span<const GroupField> group_by);

/// Header "setting,n_train,prompt_count,mean_qwk,std_qwk,n_seeds"; ungrouped fields are empty.
void write_aggregate_csv(std::span<const AggregateRow> rows, const std::filesystem::path& path);

struct AggregateCsvRow {
  std::string setting;
  std::optional<int> n_train;
  std::optional<int> prompt_count;
  double mean_qwk = 0.0;
  double std_qwk = 0.0;
  int n_seeds = 0;
};
std::vector<AggregateCsvRow> read_aggregate_csv(const std::filesystem::path& path);

}  // namespace cpft
