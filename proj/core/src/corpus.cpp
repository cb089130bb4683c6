// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "cpft/errors.hpp"
#include "cpft/rng.hpp"

namespace cpft {

struct Dataset::Storage {
  std::map<std::string, Prompt> prompts;
  std::vector<Answer> answers;
  std::unordered_map<std::string, Split> splits;
  std::unordered_map<std::string, std::vector<std::size_t>> by_prompt;
};

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Dataset::Dataset() : storage_(std::make_shared<Storage>()) {}

Dataset::Dataset(std::vector<Prompt> prompts, std::vector<Answer> answers,
                 std::unordered_map<std::string, Split> splits) {
  auto storage = std::make_shared<Storage>();
  for (auto& prompt : prompts) {
    if (prompt.prompt_id.empty()) {
      throw ValidationError("prompt with empty prompt_id");
    }
    if (prompt.max_score < 1) {
      throw ValidationError("prompt " + prompt.prompt_id + ": max_score must be >= 1");
    }
    if (prompt.key_phrases.empty()) {
      throw ValidationError("prompt " + prompt.prompt_id + ": key_phrases must be non-empty");
    }
    for (const auto& phrase : prompt.key_phrases) {
      if (phrase.empty()) {
        throw ValidationError("prompt " + prompt.prompt_id + ": empty key phrase");
      }
    }
    const std::string id = prompt.prompt_id;
    if (!storage->prompts.emplace(id, std::move(prompt)).second) {
      throw ValidationError("duplicate prompt_id " + id);
    }
  }

  std::unordered_set<std::string> answer_ids;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const Answer& answer = answers[i];
    const auto it = storage->prompts.find(answer.prompt_id);
    if (it == storage->prompts.end()) {
      throw ValidationError("answer " + answer.answer_id + ": unknown prompt_id " +
                            answer.prompt_id);
    }
    if (answer.raw_score < 0 || answer.raw_score > it->second.max_score) {
      throw ValidationError("answer " + answer.answer_id + ": score " +
                            std::to_string(answer.raw_score) + " outside [0, " +
                            std::to_string(it->second.max_score) + "]");
    }
    if (answer.justification_cue && answer.justification_cue->empty()) {
      throw ValidationError("answer " + answer.answer_id + ": empty justification_cue");
    }
    if (!answer_ids.insert(answer.answer_id).second) {
      throw ValidationError("duplicate answer_id " + answer.answer_id);
    }
    storage->by_prompt[answer.prompt_id].push_back(i);
  }
  for (const auto& [answer_id, split] : splits) {
    if (!answer_ids.contains(answer_id)) {
      throw ValidationError("split assignment for unknown answer " + answer_id);
    }
  }
  storage->answers = std::move(answers);
  storage->splits = std::move(splits);
  storage_ = std::move(storage);
}

const std::map<std::string, Prompt>& Dataset::prompts() const { return storage_->prompts; }

const Prompt& Dataset::prompt(std::string_view prompt_id) const {
  const auto it = storage_->prompts.find(std::string(prompt_id));
  if (it == storage_->prompts.end()) {
    throw ArgumentError("unknown prompt " + std::string(prompt_id));
  }
  return it->second;
}

bool Dataset::has_prompt(std::string_view prompt_id) const {
  return storage_->prompts.contains(std::string(prompt_id));
}

std::vector<std::string> Dataset::prompt_ids() const {
  std::vector<std::string> ids;
  ids.reserve(storage_->prompts.size());
  for (const auto& [id, prompt] : storage_->prompts) {
    ids.push_back(id);
  }
  return ids;
}

const std::vector<Answer>& Dataset::answers() const { return storage_->answers; }

std::vector<Answer> Dataset::answers_for(std::string_view prompt_id) const {
  std::vector<Answer> out;
  const auto it = storage_->by_prompt.find(std::string(prompt_id));
  if (it == storage_->by_prompt.end()) {
    return out;
  }
  out.reserve(it->second.size());
  for (const std::size_t index : it->second) {
    out.push_back(storage_->answers[index]);
  }
  return out;
}

std::vector<Answer> Dataset::answers_for(std::string_view prompt_id, Split split) const {
  std::vector<Answer> out;
  const auto it = storage_->by_prompt.find(std::string(prompt_id));
  if (it == storage_->by_prompt.end()) {
    return out;
  }
  for (const std::size_t index : it->second) {
    const Answer& answer = storage_->answers[index];
    if (split_of(answer.answer_id) == split) {
      out.push_back(answer);
    }
  }
  return out;
}

std::vector<Answer> Dataset::answers_in(Split split) const {
  std::vector<Answer> out;
  for (const Answer& answer : storage_->answers) {
    if (split_of(answer.answer_id) == split) {
      out.push_back(answer);
    }
  }
  return out;
}

const std::unordered_map<std::string, Split>& Dataset::splits() const { return storage_->splits; }

std::optional<Split> Dataset::split_of(std::string_view answer_id) const {
  const auto it = storage_->splits.find(std::string(answer_id));
  if (it == storage_->splits.end()) {
    return std::nullopt;
  }
  return it->second;
}

bool Dataset::has_splits() const { return !storage_->splits.empty(); }

Dataset Dataset::restrict_to(std::span<const std::string> prompt_ids) const {
  std::vector<Prompt> prompts;
  std::vector<Answer> answers;
  std::unordered_map<std::string, Split> splits;
  for (const auto& id : prompt_ids) {
    prompts.push_back(prompt(id));
  }
  const std::unordered_set<std::string> keep(prompt_ids.begin(), prompt_ids.end());
  for (const Answer& answer : storage_->answers) {
    if (!keep.contains(answer.prompt_id)) {
      continue;
    }
    answers.push_back(answer);
    if (const auto split = split_of(answer.answer_id)) {
      splits.emplace(answer.answer_id, *split);
    }
  }
  return Dataset(std::move(prompts), std::move(answers), std::move(splits));
}

Dataset Dataset::with_splits(std::unordered_map<std::string, Split> splits) const {
  std::vector<Prompt> prompts;
  for (const auto& [id, prompt] : storage_->prompts) {
    prompts.push_back(prompt);
  }
  return Dataset(std::move(prompts), storage_->answers, std::move(splits));
}

namespace {

using nlohmann::ordered_json;

template <class T>
T require_field(const ordered_json& object, const char* key, const std::string& file,
                std::size_t line) {
  const auto it = object.find(key);
  if (it == object.end()) {
    throw ParseError(file, line, std::string("missing field \"") + key + "\"");
  }
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(file, line, std::string("field \"") + key + "\" has the wrong type");
  }
}

std::optional<std::string> optional_string(const ordered_json& object, const char* key,
                                           const std::string& file, std::size_t line) {
  const auto it = object.find(key);
  if (it == object.end() || it->is_null()) {
    return std::nullopt;
  }
  if (!it->is_string()) {
    throw ParseError(file, line, std::string("field \"") + key + "\" must be a string or null");
  }
  return it->get<std::string>();
}

template <class Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path.string(), 0, "cannot open file");
  }
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    ordered_json object;
    try {
      object = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string(), number, std::string("malformed JSON: ") + e.what());
    }
    if (!object.is_object()) {
      throw ParseError(path.string(), number, "expected a JSON object");
    }
    fn(object, number);
  }
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& prompts_path,
                     const std::filesystem::path& answers_path) {
  std::vector<Prompt> prompts;
  const std::string prompts_file = prompts_path.string();
  for_each_json_line(prompts_path, [&](const ordered_json& obj, std::size_t line) {
    Prompt prompt;
    prompt.prompt_id = require_field<std::string>(obj, "prompt_id", prompts_file, line);
    prompt.max_score = require_field<int>(obj, "max_score", prompts_file, line);
    prompt.key_phrases =
        require_field<std::vector<std::string>>(obj, "key_phrases", prompts_file, line);
    prompt.question_text = optional_string(obj, "question_text", prompts_file, line);
    prompts.push_back(std::move(prompt));
  });

  std::vector<Answer> answers;
  const std::string answers_file = answers_path.string();
  for_each_json_line(answers_path, [&](const ordered_json& obj, std::size_t line) {
    Answer answer;
    answer.answer_id = require_field<std::string>(obj, "answer_id", answers_file, line);
    answer.prompt_id = require_field<std::string>(obj, "prompt_id", answers_file, line);
    answer.text = require_field<std::string>(obj, "text", answers_file, line);
    answer.raw_score = require_field<int>(obj, "score", answers_file, line);
    answer.justification_cue = optional_string(obj, "justification_cue", answers_file, line);
    answers.push_back(std::move(answer));
  });
  return Dataset(std::move(prompts), std::move(answers));
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& prompts_path,
                  const std::filesystem::path& answers_path) {
  std::ofstream prompts_out(prompts_path, std::ios::binary);
  if (!prompts_out) {
    throw Error("cannot write " + prompts_path.string());
  }
  for (const auto& [id, prompt] : dataset.prompts()) {
    ordered_json obj;
    obj["prompt_id"] = prompt.prompt_id;
    obj["max_score"] = prompt.max_score;
    obj["key_phrases"] = prompt.key_phrases;
    obj["question_text"] =
        prompt.question_text ? ordered_json(*prompt.question_text) : ordered_json(nullptr);
    prompts_out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }

  std::ofstream answers_out(answers_path, std::ios::binary);
  if (!answers_out) {
    throw Error("cannot write " + answers_path.string());
  }
  for (const Answer& answer : dataset.answers()) {
    ordered_json obj;
    obj["answer_id"] = answer.answer_id;
    obj["prompt_id"] = answer.prompt_id;
    obj["text"] = answer.text;
    obj["score"] = answer.raw_score;
    obj["justification_cue"] = answer.justification_cue
                                   ? ordered_json(*answer.justification_cue)
                                   : ordered_json(nullptr);
    answers_out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

double normalize_score(int raw, int max_score) {
  if (max_score < 1 || raw < 0 || raw > max_score) {
    throw RangeError("normalize_score: need 0 <= raw <= max_score and max_score >= 1, got raw=" +
                     std::to_string(raw) + " max_score=" + std::to_string(max_score));
  }
  return static_cast<double>(raw) / static_cast<double>(max_score);
}

int rescale_to_raw(double predicted, int max_score) {
  if (!(predicted >= 0.0 && predicted <= 1.0) || max_score < 1) {
    throw RangeError("rescale_to_raw: prediction " + std::to_string(predicted) +
                     " outside [0, 1]");
  }
  const int raw = static_cast<int>(std::round(predicted * max_score));
  return std::clamp(raw, 0, max_score);
}

Dataset make_splits(const Dataset& dataset, SplitSizes sizes, std::uint64_t seed) {
  if (sizes.train < 0 || sizes.dev < 0 || sizes.test < 0) {
    throw SizingError("split sizes must be non-negative");
  }
  const std::size_t needed = static_cast<std::size_t>(sizes.train) + sizes.dev + sizes.test;
  std::unordered_map<std::string, Split> splits;
  for (const auto& id : dataset.prompt_ids()) {
    std::vector<Answer> answers = dataset.answers_for(id);
    if (answers.size() < needed) {
      throw SizingError("prompt " + id + " has " + std::to_string(answers.size()) +
                        " answers, split needs " + std::to_string(needed));
    }
    std::vector<std::size_t> order(answers.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    Rng rng(derive_seed(seed, "split/" + id));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i = 0; i < needed; ++i) {
      const Split split = i < static_cast<std::size_t>(sizes.train) ? Split::kTrain
                          : i < static_cast<std::size_t>(sizes.train + sizes.dev)
                              ? Split::kDev
                              : Split::kTest;
      splits.emplace(answers[order[i]].answer_id, split);
    }
  }
  return dataset.with_splits(std::move(splits));
}

}  // namespace cpft
