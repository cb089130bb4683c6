// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/experiments.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <random>

#include "cpft/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace cpft {
namespace {

ExperimentConfig fast_config() {
  ExperimentConfig c;
  c.encoder = testing::small_encoder(EncoderKind::kBagOfEmbeddings);
  c.pre_finetune.epochs = 1;
  c.finetune.epochs = 1;
  return c;
}

struct Corpus {
  Dataset all = generate_synthetic_corpus(testing::small_synthetic(8, 40, 6));
  std::vector<std::string> ids = all.prompt_ids();
  std::vector<std::string> pool_ids{ids.begin(), ids.begin() + 6};
  std::vector<std::string> target_ids{ids.begin() + 6, ids.end()};
  Dataset pool = make_splits(all.restrict_to(pool_ids), {20, 5, 0}, 0);
  Dataset targets = make_splits(all.restrict_to(target_ids), {12, 8, 20}, 0);
};

TEST(Setting, ModesAndStages) {
  EXPECT_EQ(input_mode(Setting::kBaseline), InputMode::kPromptId);
  EXPECT_EQ(input_mode(Setting::kPreFinetune), InputMode::kPromptId);
  EXPECT_EQ(input_mode(Setting::kKeyPhrase), InputMode::kKeyPhrase);
  EXPECT_EQ(input_mode(Setting::kPreFinetuneKeyPhrase), InputMode::kKeyPhrase);
  EXPECT_FALSE(uses_pre_finetune(Setting::kBaseline));
  EXPECT_FALSE(uses_pre_finetune(Setting::kKeyPhrase));
  EXPECT_TRUE(uses_pre_finetune(Setting::kPreFinetune));
  EXPECT_TRUE(uses_pre_finetune(Setting::kPreFinetuneKeyPhrase));
  for (Setting s : all_settings()) EXPECT_EQ(parse_setting(to_string(s)), s);
  EXPECT_THROW(parse_setting("nope"), ConfigError);
}

TEST(RunSetting, BaselineNeverTouchesPool) {
  Corpus c;
  ExperimentRunner runner(Dataset(), c.targets, fast_config());
  const RunResult r = runner.run_setting(Setting::kBaseline, c.target_ids[0], 5, 0);
  EXPECT_EQ(runner.pre_finetune_runs(), 0);
  EXPECT_TRUE(r.pre_finetune_key.empty());
  EXPECT_THROW(runner.run_setting(Setting::kPreFinetune, c.target_ids[0], 5, 0), Error);
}

TEST(RunSetting, SameSeedSameResult) {
  Corpus c;
  for (Setting s : all_settings()) {
    ExperimentRunner a(c.pool, c.targets, fast_config());
    ExperimentRunner b(c.pool, c.targets, fast_config());
    EXPECT_EQ(a.run_setting(s, c.target_ids[1], 6, 3), b.run_setting(s, c.target_ids[1], 6, 3));
  }
}

TEST(RunSetting, TestQwkInRange) {
  Corpus c;
  ExperimentRunner runner(c.pool, c.targets, fast_config());
  for (Setting s : all_settings()) {
    const RunResult r = runner.run_setting(s, c.target_ids[0], 12, 1);
    EXPECT_GE(r.test_qwk, -1.0);
    EXPECT_LE(r.test_qwk, 1.0);
    EXPECT_GE(r.selected_epoch, 1);
  }
}

TEST(SweepFinetuneSize, CardinalityAndCheckpointReuse) {
  Corpus c;
  ExperimentRunner runner(c.pool, c.targets, fast_config());
  const std::vector<Setting> settings = all_settings();
  const std::vector<int> sizes{2, 4, 6, 8, 10};
  const std::vector<std::uint64_t> seeds{0, 1, 2};
  const std::vector<RunResult> results =
      sweep_finetune_size(runner, settings, sizes, seeds, c.target_ids);
  EXPECT_EQ(results.size(), 4u * 5u * 3u * 2u);
  EXPECT_EQ(runner.pre_finetune_runs(), 2 * 3);
  std::set<std::string> keys;
  for (const RunResult& r : results) keys.insert(r.key());
  EXPECT_EQ(keys.size(), results.size());
}

TEST(SweepFinetuneSize, ParallelWorkersMatchSerial) {
  Corpus c;
  const std::vector<Setting> settings{Setting::kBaseline, Setting::kPreFinetuneKeyPhrase};
  const std::vector<int> sizes{4, 8};
  const std::vector<std::uint64_t> seeds{0, 1};
  ExperimentRunner serial_runner(c.pool, c.targets, fast_config());
  ExperimentRunner parallel_runner(c.pool, c.targets, fast_config());
  const auto serial = sweep_finetune_size(serial_runner, settings, sizes, seeds, c.target_ids);
  SweepOptions options;
  options.workers = 3;
  const auto parallel =
      sweep_finetune_size(parallel_runner, settings, sizes, seeds, c.target_ids, options);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(parallel_runner.pre_finetune_runs(), 2);
}

TEST(SweepFinetuneSize, ResumesFromStore) {
  Corpus c;
  testing::TempDir dir("sweep");
  ResultsStore store(dir.path() / "cells");
  SweepOptions options;
  options.store = &store;
  const std::vector<Setting> settings{Setting::kKeyPhrase, Setting::kPreFinetune};
  const std::vector<int> sizes{4};
  const std::vector<std::uint64_t> seeds{0, 1};
  ExperimentRunner first(c.pool, c.targets, fast_config());
  const auto a = sweep_finetune_size(first, settings, sizes, seeds, c.target_ids, options);
  EXPECT_EQ(store.load_all().size(), a.size());
  ExperimentRunner second(c.pool, c.targets, fast_config());
  const auto b = sweep_finetune_size(second, settings, sizes, seeds, c.target_ids, options);
  EXPECT_EQ(second.pre_finetune_runs(), 0);
  EXPECT_EQ(a, b);
}

TEST(ResultsStore, JsonRoundTrip) {
  testing::TempDir dir("store");
  ResultsStore store(dir.path());
  RunResult r;
  r.setting = Setting::kPreFinetuneKeyPhrase;
  r.prompt_id = "S001";
  r.n_train = 50;
  r.prompt_count = 4;
  r.seed = 9;
  r.test_qwk = 0.123456789012345;
  r.selected_epoch = 3;
  r.warnings = {"clipped"};
  store.save(r);
  EXPECT_TRUE(store.contains(r));
  EXPECT_EQ(store.find(r).value(), r);
  RunResult other = r;
  other.seed = 10;
  EXPECT_FALSE(store.find(other).has_value());
}

TEST(PreFinetuneCache, DiskCacheIsKeyedAndVerified) {
  Corpus c;
  testing::TempDir dir("cache");
  ExperimentConfig config = fast_config();
  config.cache_dir = dir.path();
  {
    ExperimentRunner runner(c.pool, c.targets, config);
    runner.pre_finetuned(InputMode::kKeyPhrase, 0);
    EXPECT_EQ(runner.pre_finetune_runs(), 1);
  }
  ExperimentRunner reuse(c.pool, c.targets, config);
  reuse.pre_finetuned(InputMode::kKeyPhrase, 0);
  EXPECT_EQ(reuse.pre_finetune_runs(), 0);
  reuse.pre_finetuned(InputMode::kPromptId, 0);
  EXPECT_EQ(reuse.pre_finetune_runs(), 1);

  // A file whose recorded key disagrees with its name must not be reused.
  std::string key;
  ExperimentRunner probe(c.pool, c.targets, config);
  probe.pre_finetuned(c.pool, InputMode::kKeyPhrase, 5, &key);
  const std::filesystem::path path = dir.path() / ("pre_finetune-" + key + ".json");
  ScoringModel tampered = ScoringModel::load(path);
  tampered.metadata()["pre_finetune_key"] = "something else";
  tampered.save(path);
  ExperimentRunner victim(c.pool, c.targets, config);
  EXPECT_THROW(victim.pre_finetuned(InputMode::kKeyPhrase, 5), CheckpointError);
}

TEST(PreFinetuneCache, KeyDependsOnEveryInput) {
  Corpus c;
  ExperimentRunner runner(c.pool, c.targets, fast_config());
  const std::string base = runner.pre_finetune_key(c.pool, InputMode::kKeyPhrase, 0);
  EXPECT_EQ(base, runner.pre_finetune_key(c.pool, InputMode::kKeyPhrase, 0));
  EXPECT_NE(base, runner.pre_finetune_key(c.pool, InputMode::kPromptId, 0));
  EXPECT_NE(base, runner.pre_finetune_key(c.pool, InputMode::kKeyPhrase, 1));
  const PoolSubset subset = runner.sample_pool(2, 20, 0);
  EXPECT_NE(base, runner.pre_finetune_key(subset.data, InputMode::kKeyPhrase, 0));
  ExperimentConfig other = fast_config();
  other.pre_finetune.learning_rate = 5e-4;
  ExperimentRunner changed(c.pool, c.targets, other);
  EXPECT_NE(base, changed.pre_finetune_key(c.pool, InputMode::kKeyPhrase, 0));
}

TEST(SamplePool, ArithmeticAndClipping) {
  Corpus c;
  ExperimentRunner runner(c.pool, c.targets, fast_config());
  const PoolSubset two = runner.sample_pool(2, 20, 0);
  EXPECT_EQ(two.data.prompts().size(), 2u);
  EXPECT_EQ(two.data.answers_in(Split::kTrain).size(), 20u);
  EXPECT_TRUE(two.warnings.empty());
  const PoolSubset one = runner.sample_pool(1, 40, 0);
  EXPECT_EQ(one.data.answers_in(Split::kTrain).size(), 20u);  // clipped to the pool's 20
  ASSERT_EQ(one.warnings.size(), 1u);
  EXPECT_EQ(runner.sample_pool(2, 20, 0).data.prompt_ids(), two.data.prompt_ids());
  EXPECT_THROW(runner.sample_pool(7, 70, 0), SizingError);
  EXPECT_THROW(runner.sample_pool(3, 20, 0), SizingError);
}

TEST(SamplePool, SixtyFourPromptsGetTwentyFiveEach) {
  SyntheticSpec spec = testing::small_synthetic(65, 30, 1);
  const Dataset all = generate_synthetic_corpus(spec);
  std::vector<std::string> ids = all.prompt_ids();
  const std::vector<std::string> pool_ids(ids.begin(), ids.begin() + 64);
  const std::vector<std::string> target_ids(ids.begin() + 64, ids.end());
  ExperimentRunner runner(make_splits(all.restrict_to(pool_ids), {25, 5, 0}, 0),
                          make_splits(all.restrict_to(target_ids), {10, 10, 10}, 0), fast_config());
  const PoolSubset subset = runner.sample_pool(64, 1600, 0);
  EXPECT_EQ(subset.data.prompts().size(), 64u);
  for (const std::string& id : subset.data.prompt_ids()) {
    EXPECT_EQ(subset.data.answers_for(id, Split::kTrain).size(), 25u);
  }
}

TEST(SweepPromptCount, CellsCarryCountsAndWarnings) {
  Corpus c;
  ExperimentRunner runner(c.pool, c.targets, fast_config());
  const std::vector<int> counts{1, 2};
  const std::vector<std::uint64_t> seeds{0};
  const auto results = sweep_prompt_count(runner, counts, 40, 6, seeds, c.target_ids);
  ASSERT_EQ(results.size(), 4u);
  for (const RunResult& r : results) {
    EXPECT_EQ(r.setting, Setting::kPreFinetuneKeyPhrase);
    EXPECT_EQ(r.n_train, 6);
    EXPECT_EQ(r.warnings.empty(), r.prompt_count == 2);
  }
  EXPECT_EQ(runner.pre_finetune_runs(), 2);
  EXPECT_THROW(sweep_prompt_count(runner, counts, 40, 6, seeds, c.target_ids, Setting::kBaseline),
               ArgumentError);
}

TEST(SweepConfig, Validation) {
  SweepConfig config;
  EXPECT_NO_THROW(config.validate());
  config.prompt_counts = {3};
  EXPECT_THROW(config.validate(), ConfigError);
  config = SweepConfig{};
  config.finetune_sizes = {0};
  EXPECT_THROW(config.validate(), ConfigError);
}

RunResult make_result(Setting s, const std::string& prompt, int n, std::uint64_t seed, double qwk) {
  RunResult r;
  r.setting = s;
  r.prompt_id = prompt;
  r.n_train = n;
  r.seed = seed;
  r.test_qwk = qwk;
  return r;
}

TEST(Aggregate, Examples) {
  const std::vector<GroupField> by{GroupField::kSetting, GroupField::kNTrain};
  const std::vector<RunResult> single{make_result(Setting::kBaseline, "P", 10, 0, 0.42)};
  const auto one = aggregate(single, by);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0].mean_qwk, 0.42);
  EXPECT_DOUBLE_EQ(one[0].std_qwk, 0.0);
  const std::vector<RunResult> two{make_result(Setting::kBaseline, "P", 10, 0, 0.2),
                                   make_result(Setting::kBaseline, "P", 10, 1, 0.4)};
  const auto rows = aggregate(two, by);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].mean_qwk, 0.3, 1e-15);
  EXPECT_NEAR(rows[0].std_qwk, 0.1, 1e-15);
  EXPECT_EQ(rows[0].n_seeds, 2);
}

TEST(Aggregate, MatchesIndependentRecomputationOnRandomRows) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> q(-0.2, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<RunResult> results;
  for (int i = 0; i < 20; ++i) {
    results.push_back(make_result(static_cast<Setting>(pick(gen)), pick(gen) < 2 ? "A" : "B",
                                  pick(gen) < 2 ? 10 : 200, static_cast<std::uint64_t>(i % 5),
                                  q(gen)));
  }
  const std::vector<GroupField> by{GroupField::kSetting, GroupField::kNTrain};
  const auto rows = aggregate(results, by);
  // Recompute: per (setting, n) gather per-seed means, then mean and pstd.
  std::map<std::pair<int, int>, std::map<std::uint64_t, std::vector<double>>> groups;
  for (const RunResult& r : results) {
    groups[{static_cast<int>(r.setting), r.n_train}][r.seed].push_back(r.test_qwk);
  }
  ASSERT_EQ(rows.size(), groups.size());
  std::size_t i = 0;
  for (const auto& [key, seeds] : groups) {
    std::vector<double> per_seed;
    for (const auto& [seed, values] : seeds) {
      double s = 0.0;
      for (double v : values) s += v;
      per_seed.push_back(s / static_cast<double>(values.size()));
    }
    const auto [mean, std] = oracle::mean_pstd(per_seed);
    EXPECT_EQ(static_cast<int>(*rows[i].setting), key.first);
    EXPECT_EQ(*rows[i].n_train, key.second);
    EXPECT_NEAR(rows[i].mean_qwk, mean, 1e-12);
    // The oracle's E[x^2] - mean^2 route loses about sqrt(eps) to cancellation.
    EXPECT_NEAR(rows[i].std_qwk, std, 1e-7);
    ++i;
  }
}

TEST(Aggregate, CsvRoundTrip) {
  const std::vector<RunResult> results{make_result(Setting::kBaseline, "P", 10, 0, 0.2),
                                       make_result(Setting::kKeyPhrase, "P", 10, 0, 0.5)};
  const std::vector<GroupField> by{GroupField::kSetting, GroupField::kNTrain,
                                   GroupField::kPromptCount};
  testing::TempDir dir("agg");
  write_aggregate_csv(aggregate(results, by), dir.path() / "a.csv");
  const auto rows = read_aggregate_csv(dir.path() / "a.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].setting, "baseline");
  EXPECT_EQ(rows[1].setting, "key_phrase");
  EXPECT_EQ(rows[0].n_train.value(), 10);
  EXPECT_EQ(rows[0].prompt_count.value(), 0);
  EXPECT_DOUBLE_EQ(rows[1].mean_qwk, 0.5);
}

}  // namespace
}  // namespace cpft
