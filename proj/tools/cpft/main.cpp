// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

// cpft: command-line front end for corpus generation, training, evaluation,
// sweeps and plotting. Exit codes: 0 success, 2 invalid input or
// configuration, 3 insufficient data, 4 divergence, 5 checkpoint problem,
// 6 analysis failure, 1 anything else.

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpft/analysis.hpp"
#include "cpft/config.hpp"
#include "cpft/corpus.hpp"
#include "cpft/errors.hpp"
#include "cpft/experiments.hpp"
#include "cpft/metrics.hpp"
#include "cpft/plot.hpp"
#include "cpft/rng.hpp"
#include "cpft/scoring_model.hpp"
#include "cpft/synthetic.hpp"
#include "cpft/tokenizer.hpp"
#include "cpft/training.hpp"

namespace fs = std::filesystem;
using namespace cpft;

namespace {

constexpr const char* kResultsRootEnv = "CPFT_RESULTS_ROOT";

struct Common {
  std::string data;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> targets;
};

RunConfig load_config(const Common& common) {
  RunConfig config = common.config.empty() ? RunConfig{} : load_run_config(common.config);
  if (common.seed) config.seed = *common.seed;
  if (!common.targets.empty()) config.target_prompts = common.targets;
  return config;
}

Dataset load_data(const std::string& dir) {
  if (dir.empty()) throw ArgumentError("--data is required");
  return load_dataset(fs::path(dir) / "prompts.jsonl", fs::path(dir) / "answers.jsonl");
}

/// Pool = every prompt not listed as a target; both get the configured splits.
struct Partition {
  Dataset pool;
  Dataset targets;
};

Partition partition(const Dataset& data, const RunConfig& config) {
  std::vector<std::string> pool_ids;
  const std::set<std::string> target_set(config.target_prompts.begin(),
                                         config.target_prompts.end());
  for (const std::string& id : target_set) {
    if (!data.has_prompt(id)) throw ArgumentError("unknown target prompt " + id);
  }
  for (const std::string& id : data.prompt_ids()) {
    if (!target_set.contains(id)) pool_ids.push_back(id);
  }
  const std::vector<std::string> target_ids(target_set.begin(), target_set.end());
  Partition p;
  p.pool = make_splits(data.restrict_to(pool_ids), config.pool_split, config.split_seed);
  p.targets = make_splits(data.restrict_to(target_ids), config.target_split, config.split_seed);
  return p;
}

/// Vocabulary over every prompt, so checkpoints transfer between pool and targets.
std::shared_ptr<const Tokenizer> tokenizer_for(const Dataset& data) {
  const std::array<Dataset, 1> all{data};
  return std::make_shared<const Tokenizer>(build_tokenizer(all));
}

fs::path metrics_path_for(const fs::path& checkpoint) {
  fs::path path = checkpoint;
  path.replace_extension(".metrics.csv");
  return path;
}

InputMode mode_for(const std::string& flag, const ScoringModel& model) {
  if (!flag.empty()) return parse_input_mode(flag);
  const auto it = model.metadata().find("input_mode");
  if (it == model.metadata().end()) throw ArgumentError("checkpoint records no input mode; pass --mode");
  return parse_input_mode(it->second);
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

// Commands -------------------------------------------------------------------

int gen_synth(const std::string& spec_path, const std::string& out,
              std::optional<std::uint64_t> seed) {
  SyntheticSpec spec = load_synthetic_spec(spec_path);
  if (seed) spec.vocabulary_seed = *seed;
  const Dataset data = generate_synthetic_corpus(spec);
  fs::create_directories(out);
  save_dataset(data, fs::path(out) / "prompts.jsonl", fs::path(out) / "answers.jsonl");
  std::cout << "wrote " << data.prompts().size() << " prompts and " << data.answers().size()
            << " answers to " << out << '\n';
  return 0;
}

int pre_finetune_cmd(const Common& common, const std::string& mode_flag, const std::string& out,
                     std::optional<int> epochs) {
  RunConfig config = load_config(common);
  if (epochs) config.pre_finetune.epochs = *epochs;
  const Dataset data = load_data(common.data);
  const Partition parts = partition(data, config);
  const InputMode mode = parse_input_mode(mode_flag);

  TrainConfig train_config = config.pre_finetune;
  train_config.seed = derive_seed(config.seed, "pre-finetune");
  ScoringModel fresh = ScoringModel::create(config.encoder, tokenizer_for(data),
                                            derive_seed(config.seed, "init/pre-finetune"),
                                            config.delimiter);
  TrainedArtifact artifact = pre_finetune(
      parts.pool, std::move(fresh), train_config, mode,
      {.dev_metric = {}, .on_epoch = [](const EpochRecord& r) {
         std::fprintf(stderr, "epoch %d train_loss %.6f dev_qwk %.4f\n", r.epoch, r.train_loss,
                      r.dev_qwk);
       }});
  ensure_parent(out);
  artifact.model.save(out);
  write_metrics_csv(artifact, metrics_path_for(out));
  std::cout << "pre-finetuned on " << parts.pool.prompts().size() << " prompts; selected epoch "
            << artifact.selected_epoch << "; checkpoint " << out << '\n';
  return 0;
}

int finetune_cmd(const Common& common, const std::string& mode_flag, const std::string& from,
                 const std::string& prompt_id, int n_train, const std::string& out,
                 std::optional<int> epochs) {
  RunConfig config = load_config(common);
  if (config.target_prompts.empty()) config.target_prompts = {prompt_id};
  if (epochs) config.finetune.epochs = *epochs;
  const Dataset data = load_data(common.data);
  const Partition parts = partition(data, config);
  if (!parts.targets.has_prompt(prompt_id)) {
    throw ArgumentError("prompt " + prompt_id + " is not among the target prompts");
  }

  std::optional<ScoringModel> start;
  StartingPoint starting_point = StartingPoint::kFresh;
  if (!from.empty()) {
    start.emplace(ScoringModel::load(from, config.encoder));
    starting_point = StartingPoint::kPreFinetuned;
  } else {
    start.emplace(ScoringModel::create(config.encoder, tokenizer_for(data),
                                       derive_seed(config.seed, "init/finetune"),
                                       config.delimiter));
  }
  const InputMode mode = mode_for(mode_flag.empty() && from.empty() ? "key_phrase" : mode_flag,
                                  *start);
  TrainConfig train_config = config.finetune;
  train_config.seed =
      derive_seed(config.seed, "finetune/" + prompt_id + "/" + std::to_string(n_train));
  TrainedArtifact artifact =
      finetune(std::move(*start), starting_point, parts.targets, prompt_id, n_train, train_config,
               mode, derive_seed(config.seed, "subsample"));
  ensure_parent(out);
  artifact.model.save(out);
  write_metrics_csv(artifact, metrics_path_for(out));
  const Evaluation test = evaluate_model(artifact.model, parts.targets.prompt(prompt_id),
                                         parts.targets.answers_for(prompt_id, Split::kTest), mode);
  std::printf("selected_epoch %d\ntest_qwk %.6f\n", artifact.selected_epoch, test.qwk);
  return 0;
}

int evaluate_cmd(const Common& common, const std::string& checkpoint, const std::string& prompt_id,
                 const std::string& mode_flag, const std::string& split_name,
                 const std::string& out) {
  RunConfig config = load_config(common);
  if (config.target_prompts.empty()) config.target_prompts = {prompt_id};
  const Dataset data = load_data(common.data);
  const Partition parts = partition(data, config);
  const ScoringModel model = ScoringModel::load(checkpoint);
  const InputMode mode = mode_for(mode_flag, model);
  std::vector<Answer> answers;
  if (split_name == "all") {
    answers = parts.targets.answers_for(prompt_id);
  } else {
    const Split split = split_name == "train" ? Split::kTrain
                        : split_name == "dev" ? Split::kDev
                                              : Split::kTest;
    answers = parts.targets.answers_for(prompt_id, split);
  }
  const Evaluation evaluation =
      evaluate_model(model, parts.targets.prompt(prompt_id), answers, mode);
  if (!out.empty()) {
    ensure_parent(out);
    write_predictions_csv(evaluation, out);
  }
  std::printf("qwk %.6f\n", evaluation.qwk);
  return 0;
}

int zero_shot_cmd(const Common& common, const std::string& checkpoint, const std::string& prompt_id,
                  const std::string& mode_flag, const std::string& aggregation_flag,
                  const std::string& out) {
  RunConfig config = load_config(common);
  if (config.target_prompts.empty()) config.target_prompts = {prompt_id};
  const Dataset data = load_data(common.data);
  const Partition parts = partition(data, config);
  const ScoringModel model = ScoringModel::load(checkpoint);
  const InputMode mode = mode_for(mode_flag, model);
  const CueAggregation aggregation = aggregation_flag.empty()
                                         ? config.cue_aggregation
                                         : parse_cue_aggregation(aggregation_flag);
  const Evaluation evaluation = zero_shot_eval(model, parts.targets, prompt_id, mode);
  const DistanceStudy study =
      distance_prediction_study(model, parts.targets, prompt_id, mode, aggregation);
  fs::create_directories(out);
  write_predictions_csv(evaluation, fs::path(out) / "predictions.csv");
  write_distance_csv(study, fs::path(out) / "distance.csv");
  write_distance_json(study, fs::path(out) / "distance.json");
  std::printf("qwk %.6f\nr %.6f\nrows %zu\nexcluded %zu\n", evaluation.qwk, study.r,
              study.rows.size(), study.excluded);
  return 0;
}

int sweep_cmd(const Common& common, const std::string& kind, std::string out, int workers,
              const std::vector<std::uint64_t>& seeds) {
  RunConfig config = load_config(common);
  if (!seeds.empty()) config.sweep.seeds = seeds;
  if (common.seed) config.sweep.seeds = {*common.seed};
  if (config.target_prompts.empty()) throw ArgumentError("sweep needs target prompts (--targets)");
  config.validate();
  if (out.empty()) {
    const char* root = std::getenv(kResultsRootEnv);
    if (root == nullptr) throw ArgumentError(std::string("pass --out or set ") + kResultsRootEnv);
    out = (fs::path(root) / kind).string();
  }
  const Dataset data = load_data(common.data);
  const Partition parts = partition(data, config);
  ExperimentConfig experiment = config.experiment_config();
  experiment.cache_dir = fs::path(out) / "checkpoints";
  ExperimentRunner runner(parts.pool, parts.targets, experiment);
  ResultsStore store(fs::path(out) / "cells");
  SweepOptions options;
  options.workers = workers;
  options.store = &store;
  options.on_result = [](const RunResult& r) {
    std::fprintf(stderr, "%s qwk %.4f\n", r.key().c_str(), r.test_qwk);
    for (const std::string& w : r.warnings) std::fprintf(stderr, "  warning: %s\n", w.c_str());
  };

  std::vector<RunResult> results;
  std::vector<GroupField> group_by{GroupField::kSetting, GroupField::kNTrain,
                                   GroupField::kPromptCount};
  if (kind == "finetune-size") {
    results = sweep_finetune_size(runner, config.sweep.settings, config.sweep.finetune_sizes,
                                  config.sweep.seeds, config.target_prompts, options);
  } else if (kind == "prompt-count") {
    results = sweep_prompt_count(runner, config.sweep.prompt_counts, config.sweep.budget,
                                 config.sweep.prompt_count_n_train, config.sweep.seeds,
                                 config.target_prompts, Setting::kPreFinetuneKeyPhrase, options);
  } else {
    throw ArgumentError("unknown sweep kind " + kind);
  }
  const std::vector<AggregateRow> rows = aggregate(results, group_by);
  write_aggregate_csv(rows, fs::path(out) / "aggregate.csv");
  save_run_config(config, fs::path(out) / "config.json");
  std::cout << results.size() << " cells; " << runner.pre_finetune_runs()
            << " pre-finetuning runs; aggregate " << (fs::path(out) / "aggregate.csv").string()
            << '\n';
  return 0;
}

int plot_cmd(const std::string& input, const std::string& out, const std::string& axis_flag) {
  std::ifstream in(input);
  if (!in) throw ArgumentError("cannot read " + input);
  std::string header;
  std::getline(in, header);
  in.close();
  std::string svg;
  if (header.rfind("setting,", 0) == 0) {
    const std::vector<AggregateCsvRow> rows = read_aggregate_csv(input);
    AggregateAxis axis = AggregateAxis::kNTrain;
    if (axis_flag == "prompt_count") {
      axis = AggregateAxis::kPromptCount;
    } else if (axis_flag.empty()) {
      bool any_n = false;
      for (const AggregateCsvRow& r : rows) any_n = any_n || (r.prompt_count.value_or(0) == 0);
      axis = any_n ? AggregateAxis::kNTrain : AggregateAxis::kPromptCount;
    }
    svg = render_svg(line_chart_from_aggregate(rows, axis));
  } else if (header.rfind("answer_id,distance,", 0) == 0) {
    svg = render_svg(scatter_from_distance(read_distance_csv(input)));
  } else {
    throw ArgumentError("unrecognized CSV header in " + input);
  }
  ensure_parent(out);
  write_svg(svg, out);
  std::cout << "wrote " << out << '\n';
  return 0;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const RangeError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const SizingError*>(&e)) return 3;
  if (dynamic_cast<const DivergenceError*>(&e)) return 4;
  if (dynamic_cast<const CheckpointError*>(&e)) return 5;
  if (dynamic_cast<const AnalysisError*>(&e) ||
      dynamic_cast<const UndefinedCorrelationError*>(&e)) {
    return 6;
  }
  return 1;
}

void add_common(CLI::App* cmd, Common& common, bool needs_data = true) {
  auto* data = cmd->add_option("--data", common.data, "directory with prompts.jsonl and answers.jsonl");
  if (needs_data) data->required();
  cmd->add_option("--config", common.config, "run configuration JSON");
  cmd->add_option("--seed", common.seed, "base seed (overrides the config)");
  cmd->add_option("--targets", common.targets, "held-out target prompt ids")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-prompt pre-finetuning for short answer scoring"};
  app.require_subcommand(1);

  std::string spec_path, out, mode, from, prompt, checkpoint, split = "test", aggregation, kind,
                         input, axis;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  int n_train = 0;
  int workers = 1;
  std::vector<std::uint64_t> seeds;
  Common common;

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic corpus");
  gen->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--seed", seed, "vocabulary seed (overrides the spec file)");

  auto* pft = app.add_subcommand("pre-finetune", "train on the cross-prompt pool");
  add_common(pft, common);
  pft->add_option("--mode", mode, "key_phrase or prompt_id")->required();
  pft->add_option("--out", out, "checkpoint path")->required();
  pft->add_option("--epochs", epochs, "override the configured epoch count");

  auto* ft = app.add_subcommand("finetune", "train on one target prompt");
  add_common(ft, common);
  ft->add_option("--prompt", prompt, "target prompt id")->required();
  ft->add_option("--n-train", n_train, "number of training answers")->required();
  ft->add_option("--from", from, "pre-finetuned checkpoint (fresh model when absent)");
  ft->add_option("--mode", mode, "key_phrase or prompt_id (default: checkpoint's mode)");
  ft->add_option("--out", out, "checkpoint path")->required();
  ft->add_option("--epochs", epochs, "override the default epoch count");

  auto* ev = app.add_subcommand("evaluate", "score a split and report QWK");
  add_common(ev, common);
  ev->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  ev->add_option("--prompt", prompt, "prompt id")->required();
  ev->add_option("--mode", mode, "key_phrase or prompt_id (default: checkpoint's mode)");
  ev->add_option("--split", split, "train, dev, test or all")
      ->check(CLI::IsMember({"train", "dev", "test", "all"}));
  ev->add_option("--out", out, "predictions CSV");

  auto* zs = app.add_subcommand("zero-shot", "zero-shot QWK and cue-distance study");
  add_common(zs, common);
  zs->add_option("--checkpoint", checkpoint, "pre-finetuned checkpoint")->required();
  zs->add_option("--prompt", prompt, "unseen prompt id")->required();
  zs->add_option("--mode", mode, "key_phrase or prompt_id (default: checkpoint's mode)");
  zs->add_option("--aggregation", aggregation, "min or joined (default: config)");
  zs->add_option("--out", out, "output directory")->required();

  auto* sw = app.add_subcommand("sweep", "run a finetune-size or prompt-count sweep");
  add_common(sw, common);
  sw->add_option("--kind", kind, "finetune-size or prompt-count")
      ->required()
      ->check(CLI::IsMember({"finetune-size", "prompt-count"}));
  sw->add_option("--out", out, std::string("results directory (default: $") + kResultsRootEnv +
                                   "/<kind>)");
  sw->add_option("--workers", workers, "parallel worker threads")->check(CLI::PositiveNumber);
  sw->add_option("--seeds", seeds, "seed list (overrides the config)")->delimiter(',');

  auto* pl = app.add_subcommand("plot", "render an aggregate or distance CSV as SVG");
  pl->add_option("--input", input, "aggregate.csv or distance.csv")->required();
  pl->add_option("--out", out, "SVG path")->required();
  pl->add_option("--axis", axis, "n_train or prompt_count (aggregate input only)")
      ->check(CLI::IsMember({"n_train", "prompt_count"}));
  pl->add_option("--seed", seed, "accepted for uniformity; plotting is not random");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return gen_synth(spec_path, out, seed);
    if (*pft) return pre_finetune_cmd(common, mode, out, epochs);
    if (*ft) return finetune_cmd(common, mode, from, prompt, n_train, out, epochs);
    if (*ev) return evaluate_cmd(common, checkpoint, prompt, mode, split, out);
    if (*zs) return zero_shot_cmd(common, checkpoint, prompt, mode, aggregation, out);
    if (*sw) return sweep_cmd(common, kind, out, workers, seeds);
    if (*pl) return plot_cmd(input, out, axis);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 1;
}
