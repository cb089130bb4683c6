// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cpft/errors.hpp"
#include "json_io.hpp"

namespace cpft {

namespace {

using detail::Json;
using detail::read_if_present;

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

Json train_to_json(const TrainConfig& c) {
  Json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["optimizer"] = std::string(to_string(c.optimizer));
  j["checkpoint_selection"] = std::string(to_string(c.checkpoint_selection));
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  return j;
}

TrainConfig train_from_json(const Json& j, TrainConfig c, const std::string& where) {
  reject_unknown(j,
                 {"epochs", "batch_size", "learning_rate", "optimizer", "checkpoint_selection",
                  "adam_beta1", "adam_beta2", "adam_epsilon"},
                 where);
  read_if_present(j, "epochs", c.epochs);
  read_if_present(j, "batch_size", c.batch_size);
  read_if_present(j, "learning_rate", c.learning_rate);
  std::string optimizer(to_string(c.optimizer));
  read_if_present(j, "optimizer", optimizer);
  c.optimizer = parse_optimizer_kind(optimizer);
  std::string selection(to_string(c.checkpoint_selection));
  read_if_present(j, "checkpoint_selection", selection);
  c.checkpoint_selection = parse_checkpoint_selection(selection);
  read_if_present(j, "adam_beta1", c.adam_beta1);
  read_if_present(j, "adam_beta2", c.adam_beta2);
  read_if_present(j, "adam_epsilon", c.adam_epsilon);
  return c;
}

Json split_to_json(const SplitSizes& s) {
  Json j;
  j["train"] = s.train;
  j["dev"] = s.dev;
  j["test"] = s.test;
  return j;
}

SplitSizes split_from_json(const Json& j, SplitSizes s, const std::string& where) {
  reject_unknown(j, {"train", "dev", "test"}, where);
  read_if_present(j, "train", s.train);
  read_if_present(j, "dev", s.dev);
  read_if_present(j, "test", s.test);
  return s;
}

}  // namespace

void RunConfig::validate() const {
  encoder.validate();
  pre_finetune.validate(true);
  finetune.validate(true);
  sweep.validate();
  for (const SplitSizes& s : {pool_split, target_split}) {
    if (s.train < 0 || s.dev < 0 || s.test < 0) throw ConfigError("split sizes must be >= 0");
  }
  if (delimiter.empty()) throw ConfigError("delimiter must not be empty");
}

ExperimentConfig RunConfig::experiment_config() const {
  ExperimentConfig c;
  c.encoder = encoder;
  c.pre_finetune = pre_finetune;
  c.finetune = finetune;
  c.delimiter = delimiter;
  return c;
}

RunConfig run_config_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  reject_unknown(j,
                 {"seed", "delimiter", "cue_aggregation", "encoder", "pre_finetune", "finetune",
                  "pool_split", "target_split", "split_seed", "target_prompts", "sweep"},
                 "config");
  RunConfig c;
  read_if_present(j, "seed", c.seed);
  read_if_present(j, "delimiter", c.delimiter);
  std::string aggregation(to_string(c.cue_aggregation));
  read_if_present(j, "cue_aggregation", aggregation);
  try {
    c.cue_aggregation = parse_cue_aggregation(aggregation);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("encoder")) {
    reject_unknown(j["encoder"],
                   {"kind", "hidden_size", "max_sequence_length", "num_layers", "num_heads",
                    "ffn_size", "pretrained_path"},
                   "encoder");
    c.encoder = detail::encoder_from_json(j["encoder"]);
  }
  if (j.contains("pre_finetune")) {
    c.pre_finetune = train_from_json(j["pre_finetune"], c.pre_finetune, "pre_finetune");
  }
  if (j.contains("finetune")) c.finetune = train_from_json(j["finetune"], c.finetune, "finetune");
  if (j.contains("pool_split")) c.pool_split = split_from_json(j["pool_split"], c.pool_split, "pool_split");
  if (j.contains("target_split")) {
    c.target_split = split_from_json(j["target_split"], c.target_split, "target_split");
  }
  read_if_present(j, "split_seed", c.split_seed);
  read_if_present(j, "target_prompts", c.target_prompts);
  if (j.contains("sweep")) {
    const Json& s = j["sweep"];
    reject_unknown(s,
                   {"finetune_sizes", "budget", "prompt_counts", "prompt_count_n_train", "seeds",
                    "settings"},
                   "sweep");
    read_if_present(s, "finetune_sizes", c.sweep.finetune_sizes);
    read_if_present(s, "budget", c.sweep.budget);
    read_if_present(s, "prompt_counts", c.sweep.prompt_counts);
    read_if_present(s, "prompt_count_n_train", c.sweep.prompt_count_n_train);
    read_if_present(s, "seeds", c.sweep.seeds);
    if (s.contains("settings")) {
      std::vector<std::string> names;
      read_if_present(s, "settings", names);
      c.sweep.settings.clear();
      for (const std::string& name : names) c.sweep.settings.push_back(parse_setting(name));
    }
  }
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["delimiter"] = c.delimiter;
  j["cue_aggregation"] = std::string(to_string(c.cue_aggregation));
  j["encoder"] = detail::encoder_to_json(c.encoder);
  j["pre_finetune"] = train_to_json(c.pre_finetune);
  j["finetune"] = train_to_json(c.finetune);
  j["pool_split"] = split_to_json(c.pool_split);
  j["target_split"] = split_to_json(c.target_split);
  j["split_seed"] = c.split_seed;
  j["target_prompts"] = c.target_prompts;
  Json s;
  s["finetune_sizes"] = c.sweep.finetune_sizes;
  s["budget"] = c.sweep.budget;
  s["prompt_counts"] = c.sweep.prompt_counts;
  s["prompt_count_n_train"] = c.sweep.prompt_count_n_train;
  s["seeds"] = c.sweep.seeds;
  std::vector<std::string> settings;
  for (Setting setting : c.sweep.settings) settings.emplace_back(to_string(setting));
  s["settings"] = settings;
  j["sweep"] = s;
  return j.dump(2);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return run_config_from_json(buffer.str());
}

void save_run_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << run_config_to_json(config) << '\n';
}

std::string train_config_to_json(const TrainConfig& config) {
  return train_to_json(config).dump(2);
}

SyntheticSpec synthetic_spec_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed synthetic spec: ") + e.what());
  }
  reject_unknown(j,
                 {"num_prompts", "answers_per_prompt", "max_score", "vocabulary_seed",
                  "paraphrase_noise_rate", "distractor_rate", "min_phrase_length",
                  "max_phrase_length", "content_vocabulary_size", "min_filler_words",
                  "max_filler_words"},
                 "synthetic spec");
  SyntheticSpec s;
  read_if_present(j, "num_prompts", s.num_prompts);
  read_if_present(j, "answers_per_prompt", s.answers_per_prompt);
  read_if_present(j, "max_score", s.max_score);
  read_if_present(j, "vocabulary_seed", s.vocabulary_seed);
  read_if_present(j, "paraphrase_noise_rate", s.paraphrase_noise_rate);
  read_if_present(j, "distractor_rate", s.distractor_rate);
  read_if_present(j, "min_phrase_length", s.min_phrase_length);
  read_if_present(j, "max_phrase_length", s.max_phrase_length);
  read_if_present(j, "content_vocabulary_size", s.content_vocabulary_size);
  read_if_present(j, "min_filler_words", s.min_filler_words);
  read_if_present(j, "max_filler_words", s.max_filler_words);
  s.validate();
  return s;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read spec " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return synthetic_spec_from_json(buffer.str());
}

std::string synthetic_spec_to_json(const SyntheticSpec& s) {
  Json j;
  j["num_prompts"] = s.num_prompts;
  j["answers_per_prompt"] = s.answers_per_prompt;
  j["max_score"] = s.max_score;
  j["vocabulary_seed"] = s.vocabulary_seed;
  j["paraphrase_noise_rate"] = s.paraphrase_noise_rate;
  j["distractor_rate"] = s.distractor_rate;
  j["min_phrase_length"] = s.min_phrase_length;
  j["max_phrase_length"] = s.max_phrase_length;
  j["content_vocabulary_size"] = s.content_vocabulary_size;
  j["min_filler_words"] = s.min_filler_words;
  j["max_filler_words"] = s.max_filler_words;
  return j.dump(2);
}

}  // namespace cpft
