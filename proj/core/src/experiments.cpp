// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/experiments.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "cpft/errors.hpp"
#include "cpft/metrics.hpp"
#include "cpft/rng.hpp"
#include "json_io.hpp"

namespace cpft {

namespace {

constexpr std::array<std::string_view, 4> kSettingNames{"baseline", "key_phrase", "pre_finetune",
                                                        "pre_finetune_key_phrase"};

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016" PRIx64, value);
  return buffer;
}

std::string encoder_canonical(const EncoderConfig& c) {
  return detail::encoder_to_json(c).dump();
}

}  // namespace

std::string_view to_string(Setting setting) { return kSettingNames[static_cast<int>(setting)]; }

Setting parse_setting(std::string_view text) {
  for (std::size_t i = 0; i < kSettingNames.size(); ++i) {
    if (kSettingNames[i] == text) return static_cast<Setting>(i);
  }
  throw ConfigError("unknown setting \"" + std::string(text) + "\"");
}

std::vector<Setting> all_settings() {
  return {Setting::kBaseline, Setting::kKeyPhrase, Setting::kPreFinetune,
          Setting::kPreFinetuneKeyPhrase};
}

InputMode input_mode(Setting setting) {
  return setting == Setting::kBaseline || setting == Setting::kPreFinetune ? InputMode::kPromptId
                                                                          : InputMode::kKeyPhrase;
}

bool uses_pre_finetune(Setting setting) {
  return setting == Setting::kPreFinetune || setting == Setting::kPreFinetuneKeyPhrase;
}

std::string RunResult::key() const {
  return std::string(to_string(setting)) + "__" + prompt_id + "__n" + std::to_string(n_train) +
         "__c" + std::to_string(prompt_count) + "__s" + std::to_string(seed);
}

void SweepConfig::validate() const {
  for (int size : finetune_sizes) {
    if (size < 1) throw ConfigError("finetune sizes must be positive");
  }
  if (budget < 1) throw ConfigError("budget must be positive");
  for (int count : prompt_counts) {
    if (count < 1) throw ConfigError("prompt counts must be positive");
    if (budget % count != 0) {
      throw ConfigError("budget " + std::to_string(budget) + " is not divisible by prompt count " +
                        std::to_string(count));
    }
  }
  if (prompt_count_n_train < 1) throw ConfigError("prompt_count_n_train must be positive");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (settings.empty()) throw ConfigError("at least one setting is required");
}

ExperimentRunner::ExperimentRunner(Dataset pool, Dataset targets, ExperimentConfig config)
    : pool_(std::move(pool)), targets_(std::move(targets)), config_(std::move(config)) {
  if (!targets_.has_splits()) throw ArgumentError("target dataset carries no splits");
  config_.encoder.validate();
  config_.pre_finetune.validate(true);
  config_.finetune.validate(true);
  const std::array<Dataset, 2> both{pool_, targets_};
  tokenizer_ = std::make_shared<const Tokenizer>(build_tokenizer(both));
}

std::string ExperimentRunner::pre_finetune_key(const Dataset& pool_subset, InputMode mode,
                                               std::uint64_t seed) const {
  std::string material;
  for (const std::string& id : pool_subset.prompt_ids()) material += id + ';';
  for (const Answer& a : pool_subset.answers()) {
    const std::optional<Split> split = pool_subset.split_of(a.answer_id);
    material += a.answer_id + '=' + std::to_string(a.raw_score) + ':' +
                (split ? std::string(to_string(*split)) : "-") + ';';
  }
  std::string vocabulary;
  for (const std::string& token : tokenizer_->vocabulary()) vocabulary += token + '\n';
  std::string key = "pool=" + hex64(fnv1a(material));
  key += "|mode=" + std::string(to_string(mode));
  key += "|encoder=" + encoder_canonical(config_.encoder);
  key += "|train=" + config_.pre_finetune.canonical();
  key += "|delimiter=" + config_.delimiter;
  key += "|vocab=" + hex64(fnv1a(vocabulary));
  key += "|seed=" + std::to_string(seed);
  return key;
}

std::shared_ptr<const ScoringModel> ExperimentRunner::pre_finetuned(InputMode mode,
                                                                    std::uint64_t seed) {
  return pre_finetuned(pool_, mode, seed);
}

std::shared_ptr<const ScoringModel> ExperimentRunner::pre_finetuned(const Dataset& pool_subset,
                                                                    InputMode mode,
                                                                    std::uint64_t seed,
                                                                    std::string* key_out) {
  const std::string material = pre_finetune_key(pool_subset, mode, seed);
  const std::string key = hex64(fnv1a(material));
  if (key_out != nullptr) *key_out = key;

  std::promise<std::shared_ptr<const ScoringModel>> promise;
  std::shared_future<std::shared_ptr<const ScoringModel>> pending;
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (const auto it = cache_.find(key); it != cache_.end()) {
      pending = it->second;
    } else {
      cache_.emplace(key, promise.get_future().share());
    }
  }
  // Another cell is producing or has produced this model.
  if (pending.valid()) return pending.get();
  try {
    const std::filesystem::path path =
        config_.cache_dir.empty() ? std::filesystem::path{}
                                  : config_.cache_dir / ("pre_finetune-" + key + ".json");
    std::shared_ptr<const ScoringModel> model;
    if (!path.empty() && std::filesystem::exists(path)) {
      auto loaded = std::make_shared<ScoringModel>(ScoringModel::load(path, config_.encoder));
      const auto stored = loaded->metadata().find("pre_finetune_key");
      if (stored == loaded->metadata().end() || stored->second != material) {
        throw CheckpointError("cached checkpoint " + path.string() +
                              " does not match its content key");
      }
      model = std::move(loaded);
    } else {
      TrainConfig train_config = config_.pre_finetune;
      train_config.seed = derive_seed(seed, "pre-finetune");
      ScoringModel fresh = ScoringModel::create(config_.encoder, tokenizer_,
                                                derive_seed(seed, "init/pre-finetune"),
                                                config_.delimiter);
      TrainedArtifact artifact = cpft::pre_finetune(pool_subset, std::move(fresh), train_config, mode);
      pre_finetune_runs_.fetch_add(1);
      artifact.model.metadata()["pre_finetune_key"] = material;
      if (!path.empty()) {
        std::filesystem::create_directories(config_.cache_dir);
        artifact.model.save(path);
      }
      model = std::make_shared<const ScoringModel>(std::move(artifact.model));
    }
    promise.set_value(model);
    return model;
  } catch (...) {
    promise.set_exception(std::current_exception());
    throw;
  }
}

PoolSubset ExperimentRunner::sample_pool(int count, int budget, std::uint64_t seed) const {
  std::vector<std::string> ids = pool_.prompt_ids();
  if (count < 1 || static_cast<std::size_t>(count) > ids.size()) {
    throw SizingError("pool has " + std::to_string(ids.size()) + " prompts, requested " +
                      std::to_string(count));
  }
  if (budget % count != 0) {
    throw SizingError("budget " + std::to_string(budget) + " is not divisible by " +
                      std::to_string(count));
  }
  Rng rng(derive_seed(seed, "prompt-sample/" + std::to_string(count)));
  rng.shuffle(std::span<std::string>(ids));
  ids.resize(static_cast<std::size_t>(count));
  std::sort(ids.begin(), ids.end());

  const int per_prompt = budget / count;
  PoolSubset subset;
  std::vector<Prompt> prompts;
  std::vector<Answer> answers;
  std::unordered_map<std::string, Split> splits;
  for (const std::string& id : ids) {
    prompts.push_back(pool_.prompt(id));
    std::vector<Answer> train = pool_.has_splits() ? pool_.answers_for(id, Split::kTrain)
                                                   : pool_.answers_for(id);
    Rng answer_rng(derive_seed(seed, "pool-answers/" + id));
    answer_rng.shuffle(std::span<Answer>(train));
    if (static_cast<std::size_t>(per_prompt) > train.size()) {
      subset.warnings.push_back("prompt " + id + ": requested " + std::to_string(per_prompt) +
                                " answers, clipped to " + std::to_string(train.size()));
    } else {
      train.resize(static_cast<std::size_t>(per_prompt));
    }
    for (Answer& a : train) {
      splits.emplace(a.answer_id, Split::kTrain);
      answers.push_back(std::move(a));
    }
    if (pool_.has_splits()) {
      for (Answer& a : pool_.answers_for(id, Split::kDev)) {
        splits.emplace(a.answer_id, Split::kDev);
        answers.push_back(std::move(a));
      }
    }
  }
  subset.data = Dataset(std::move(prompts), std::move(answers), std::move(splits));
  return subset;
}

RunResult ExperimentRunner::run_setting(Setting setting, std::string_view prompt_id, int n_train,
                                        std::uint64_t seed) {
  return run_setting(setting, PoolSubset{pool_, {}}, 0, prompt_id, n_train, seed);
}

RunResult ExperimentRunner::run_setting(Setting setting, const PoolSubset& subset,
                                        int prompt_count, std::string_view prompt_id, int n_train,
                                        std::uint64_t seed) {
  const InputMode mode = input_mode(setting);
  RunResult result;
  result.setting = setting;
  result.prompt_id = std::string(prompt_id);
  result.n_train = n_train;
  result.prompt_count = prompt_count;
  result.seed = seed;

  std::optional<ScoringModel> start;
  StartingPoint starting_point = StartingPoint::kFresh;
  if (uses_pre_finetune(setting)) {
    start.emplace(*pre_finetuned(subset.data, mode, seed, &result.pre_finetune_key));
    starting_point = StartingPoint::kPreFinetuned;
    result.warnings = subset.warnings;
    if (!config_.cache_dir.empty()) {
      result.checkpoint_path =
          (config_.cache_dir / ("pre_finetune-" + result.pre_finetune_key + ".json")).string();
    }
  } else {
    start.emplace(ScoringModel::create(config_.encoder, tokenizer_,
                                       derive_seed(seed, "init/finetune"), config_.delimiter));
  }

  TrainConfig train_config = config_.finetune;
  train_config.seed =
      derive_seed(seed, "finetune/" + result.prompt_id + "/" + std::to_string(n_train));
  TrainedArtifact artifact = finetune(std::move(*start), starting_point, targets_, prompt_id,
                                      n_train, train_config, mode, derive_seed(seed, "subsample"));
  const std::vector<Answer> test = targets_.answers_for(prompt_id, Split::kTest);
  result.test_qwk =
      evaluate_model(artifact.model, targets_.prompt(prompt_id), test, mode).qwk;
  result.selected_epoch = artifact.selected_epoch;
  return result;
}

// Results store -------------------------------------------------------------

std::string result_to_json(const RunResult& r) {
  detail::Json j;
  j["setting"] = std::string(to_string(r.setting));
  j["prompt_id"] = r.prompt_id;
  j["n_train"] = r.n_train;
  j["prompt_count"] = r.prompt_count;
  j["seed"] = r.seed;
  j["test_qwk"] = r.test_qwk;
  j["selected_epoch"] = r.selected_epoch;
  j["pre_finetune_key"] = r.pre_finetune_key;
  j["checkpoint_path"] = r.checkpoint_path;
  j["warnings"] = r.warnings;
  return j.dump(2);
}

RunResult result_from_json(std::string_view text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("<result>", 1, e.what());
  }
  RunResult r;
  std::string setting;
  detail::read_if_present(j, "setting", setting);
  r.setting = parse_setting(setting);
  detail::read_if_present(j, "prompt_id", r.prompt_id);
  detail::read_if_present(j, "n_train", r.n_train);
  detail::read_if_present(j, "prompt_count", r.prompt_count);
  detail::read_if_present(j, "seed", r.seed);
  detail::read_if_present(j, "test_qwk", r.test_qwk);
  detail::read_if_present(j, "selected_epoch", r.selected_epoch);
  detail::read_if_present(j, "pre_finetune_key", r.pre_finetune_key);
  detail::read_if_present(j, "checkpoint_path", r.checkpoint_path);
  detail::read_if_present(j, "warnings", r.warnings);
  return r;
}

ResultsStore::ResultsStore(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
}

std::filesystem::path ResultsStore::path_for(const RunResult& result) const {
  std::string name = result.key();
  for (char& c : name) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                      c == '.';
    if (!safe) c = '-';
  }
  return directory_ / (name + ".json");
}

bool ResultsStore::contains(const RunResult& cell) const {
  return std::filesystem::exists(path_for(cell));
}

std::optional<RunResult> ResultsStore::find(const RunResult& cell) const {
  const std::filesystem::path path = path_for(cell);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunResult stored = result_from_json(buffer.str());
  if (stored.key() != cell.key()) {
    throw CheckpointError("result file " + path.string() + " holds a different cell");
  }
  return stored;
}

void ResultsStore::save(const RunResult& result) const {
  const std::filesystem::path path = path_for(result);
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write " + tmp.string());
    out << result_to_json(result) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::vector<RunResult> ResultsStore::load_all() const {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunResult> results;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    results.push_back(result_from_json(buffer.str()));
  }
  return results;
}

// Sweeps --------------------------------------------------------------------

namespace {

/// Runs cells[i] for every i on `workers` threads; results keep cell order.
std::vector<RunResult> run_cells(std::vector<RunResult> cells,
                                 const std::function<RunResult(const RunResult&)>& run,
                                 const SweepOptions& options) {
  std::vector<RunResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (failure) return;
      }
      try {
        std::optional<RunResult> done;
        if (options.store != nullptr) done = options.store->find(cells[i]);
        if (!done) {
          done = run(cells[i]);
          if (options.store != nullptr) options.store->save(*done);
        }
        results[i] = *done;
        if (options.on_result) {
          std::lock_guard<std::mutex> lock(mutex);
          options.on_result(results[i]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace

std::vector<RunResult> sweep_finetune_size(ExperimentRunner& runner,
                                           std::span<const Setting> settings,
                                           std::span<const int> sizes,
                                           std::span<const std::uint64_t> seeds,
                                           std::span<const std::string> target_prompts,
                                           const SweepOptions& options) {
  std::vector<RunResult> cells;
  for (Setting setting : settings) {
    for (const std::string& prompt : target_prompts) {
      for (int size : sizes) {
        for (std::uint64_t seed : seeds) {
          RunResult cell;
          cell.setting = setting;
          cell.prompt_id = prompt;
          cell.n_train = size;
          cell.seed = seed;
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return run_cells(
      std::move(cells),
      [&runner](const RunResult& cell) {
        return runner.run_setting(cell.setting, cell.prompt_id, cell.n_train, cell.seed);
      },
      options);
}

std::vector<RunResult> sweep_prompt_count(ExperimentRunner& runner,
                                          std::span<const int> prompt_counts, int budget,
                                          int n_train, std::span<const std::uint64_t> seeds,
                                          std::span<const std::string> target_prompts,
                                          Setting setting, const SweepOptions& options) {
  if (!uses_pre_finetune(setting)) {
    throw ArgumentError("prompt-count sweep needs a pre-finetuning setting");
  }
  std::vector<RunResult> cells;
  for (int count : prompt_counts) {
    // Validates sizes before any training starts.
    for (std::uint64_t seed : seeds) (void)runner.sample_pool(count, budget, seed);
    for (const std::string& prompt : target_prompts) {
      for (std::uint64_t seed : seeds) {
        RunResult cell;
        cell.setting = setting;
        cell.prompt_id = prompt;
        cell.n_train = n_train;
        cell.prompt_count = count;
        cell.seed = seed;
        cells.push_back(std::move(cell));
      }
    }
  }
  return run_cells(
      std::move(cells),
      [&runner, budget](const RunResult& cell) {
        const PoolSubset subset = runner.sample_pool(cell.prompt_count, budget, cell.seed);
        return runner.run_setting(cell.setting, subset, cell.prompt_count, cell.prompt_id,
                                  cell.n_train, cell.seed);
      },
      options);
}

// Aggregation ---------------------------------------------------------------

std::vector<AggregateRow> aggregate(std::span<const RunResult> results,
                                    std::span<const GroupField> group_by) {
  auto has = [&](GroupField f) {
    return std::find(group_by.begin(), group_by.end(), f) != group_by.end();
  };
  const bool by_setting = has(GroupField::kSetting);
  const bool by_prompt = has(GroupField::kPromptId);
  const bool by_n = has(GroupField::kNTrain);
  const bool by_count = has(GroupField::kPromptCount);
  const bool by_seed = has(GroupField::kSeed);

  using Key = std::tuple<int, std::string, int, int, std::uint64_t>;
  std::map<Key, std::map<std::uint64_t, std::vector<double>>> groups;
  for (const RunResult& r : results) {
    const Key key{by_setting ? static_cast<int>(r.setting) : -1, by_prompt ? r.prompt_id : "",
                  by_n ? r.n_train : -1, by_count ? r.prompt_count : -1, by_seed ? r.seed : 0};
    groups[key][r.seed].push_back(r.test_qwk);
  }

  std::vector<AggregateRow> rows;
  for (const auto& [key, by_seed_values] : groups) {
    std::vector<double> values;
    int n_results = 0;
    for (const auto& [seed, qwks] : by_seed_values) {
      n_results += static_cast<int>(qwks.size());
      if (by_seed) {
        values.insert(values.end(), qwks.begin(), qwks.end());
      } else {
        double sum = 0.0;
        for (double q : qwks) sum += q;
        values.push_back(sum / static_cast<double>(qwks.size()));
      }
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);

    AggregateRow row;
    if (by_setting) row.setting = static_cast<Setting>(std::get<0>(key));
    if (by_prompt) row.prompt_id = std::get<1>(key);
    if (by_n) row.n_train = std::get<2>(key);
    if (by_count) row.prompt_count = std::get<3>(key);
    if (by_seed) row.seed = std::get<4>(key);
    row.mean_qwk = mean;
    row.std_qwk = std::sqrt(ss / static_cast<double>(values.size()));
    row.n_seeds = static_cast<int>(by_seed_values.size());
    row.n_results = n_results;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_aggregate_csv(std::span<const AggregateRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "setting,n_train,prompt_count,mean_qwk,std_qwk,n_seeds\n";
  char numbers[96];
  for (const AggregateRow& row : rows) {
    out << (row.setting ? std::string(to_string(*row.setting)) : "") << ','
        << (row.n_train ? std::to_string(*row.n_train) : "") << ','
        << (row.prompt_count ? std::to_string(*row.prompt_count) : "");
    std::snprintf(numbers, sizeof(numbers), ",%.10g,%.10g,%d\n", row.mean_qwk, row.std_qwk,
                  row.n_seeds);
    out << numbers;
  }
}

std::vector<AggregateCsvRow> read_aggregate_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "setting,n_train,prompt_count,mean_qwk,std_qwk,n_seeds") {
    throw ParseError(path.string(), 1, "unexpected aggregate header");
  }
  std::vector<AggregateCsvRow> rows;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream fields(line);
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw ParseError(path.string(), line_number, "expected 6 columns");
    try {
      AggregateCsvRow row;
      row.setting = cells[0];
      if (!cells[1].empty()) row.n_train = std::stoi(cells[1]);
      if (!cells[2].empty()) row.prompt_count = std::stoi(cells[2]);
      row.mean_qwk = std::stod(cells[3]);
      row.std_qwk = std::stod(cells[4]);
      row.n_seeds = std::stoi(cells[5]);
      rows.push_back(std::move(row));
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_number, "non-numeric field");
    }
  }
  return rows;
}

}  // namespace cpft
