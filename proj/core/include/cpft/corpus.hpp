// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cpft {

/// One analytic criterion: scores run over {0, ..., max_score}.
struct Prompt {
  std::string prompt_id;
  int max_score = 1;
  std::vector<std::string> key_phrases;
  std::optional<std::string> question_text;
};

struct Answer {
  std::string answer_id;
  std::string prompt_id;
  std::string text;  // may be empty
  int raw_score = 0;
  std::optional<std::string> justification_cue;
};

enum class Split { kTrain, kDev, kTest };

std::string_view to_string(Split split);

struct SplitSizes {
  int train = 200;
  int dev = 50;
  int test = 250;
};

/// Validated, immutable collection of prompts, answers and split assignments.
///
/// Copies share storage, so passing a Dataset by value is cheap and safe across
/// threads.
class Dataset {
 public:
  Dataset();

  /// Throws ValidationError when any invariant fails: unique ids, max_score >= 1,
  /// non-empty key phrases, scores in range, answers referencing known prompts,
  /// non-empty cues, split keys naming known answers.
  Dataset(std::vector<Prompt> prompts, std::vector<Answer> answers,
          std::unordered_map<std::string, Split> splits = {});

  const std::map<std::string, Prompt>& prompts() const;
  const Prompt& prompt(std::string_view prompt_id) const;
  bool has_prompt(std::string_view prompt_id) const;
  std::vector<std::string> prompt_ids() const;

  const std::vector<Answer>& answers() const;
  /// Answers of one prompt in file order.
  std::vector<Answer> answers_for(std::string_view prompt_id) const;
  /// Answers of one prompt assigned to `split`, in file order.
  std::vector<Answer> answers_for(std::string_view prompt_id, Split split) const;
  /// All answers assigned to `split`, in file order.
  std::vector<Answer> answers_in(Split split) const;

  const std::unordered_map<std::string, Split>& splits() const;
  std::optional<Split> split_of(std::string_view answer_id) const;
  bool has_splits() const;

  /// Sub-dataset holding only the given prompts, their answers and split entries.
  Dataset restrict_to(std::span<const std::string> prompt_ids) const;
  Dataset with_splits(std::unordered_map<std::string, Split> splits) const;

 private:
  struct Storage;
  std::shared_ptr<const Storage> storage_;
};

/// Reads the prompts and answers JSON Lines files and validates them.
Dataset load_dataset(const std::filesystem::path& prompts_path,
                     const std::filesystem::path& answers_path);

/// Writes both JSON Lines files; output is byte-stable for a given dataset.
void save_dataset(const Dataset& dataset, const std::filesystem::path& prompts_path,
                  const std::filesystem::path& answers_path);

/// raw / max_score. Throws RangeError unless 0 <= raw <= max_score and max_score >= 1.
double normalize_score(int raw, int max_score);

/// Nearest integer to predicted * max_score, halves rounded away from zero.
/// Throws RangeError unless predicted is in [0, 1].
int rescale_to_raw(double predicted, int max_score);

/// Per-prompt seeded sampling without replacement. Prompts are visited in id
/// order; answers beyond train+dev+test stay unassigned. Throws SizingError
/// naming the first prompt that is too small.
Dataset make_splits(const Dataset& dataset, SplitSizes sizes, std::uint64_t seed);

}  // namespace cpft
