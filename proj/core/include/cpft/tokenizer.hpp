// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cpft/corpus.hpp"

namespace cpft {

/// Word-level tokenizer with an explicit vocabulary.
///
/// Text is split on whitespace; ASCII punctuation and CJK characters become
/// single-character tokens, everything else is grouped into words and ASCII
/// letters are lower-cased. Ids 0-3 are reserved for [PAD], [UNK], [CLS] and
/// [SEP]; prompt-ID tokens are spelled "[PROMPT_<id>]".
class Tokenizer {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  /// Vocabulary must start with the four reserved tokens and hold no duplicates.
  explicit Tokenizer(std::vector<std::string> vocabulary);

  /// Builds a sorted vocabulary from raw texts plus one token per prompt id.
  static Tokenizer build(std::span<const std::string> texts,
                         std::span<const std::string> prompt_ids);

  static std::vector<std::string> split(std::string_view text);
  static std::string prompt_token_text(std::string_view prompt_id);

  std::vector<int> encode(std::string_view text) const;
  int id(std::string_view token) const;
  /// Id of "[PROMPT_<id>]", or kUnk when the prompt was unknown at build time.
  int prompt_token(std::string_view prompt_id) const;
  const std::string& token(int id) const;

  std::size_t size() const { return vocabulary_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> index_;
};

/// Tokenizer covering every key phrase, question, answer and prompt id of the datasets.
Tokenizer build_tokenizer(std::span<const Dataset> datasets);

}  // namespace cpft
