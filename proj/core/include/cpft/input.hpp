// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cpft/corpus.hpp"
#include "cpft/tokenizer.hpp"

namespace cpft {

enum class InputMode { kKeyPhrase, kPromptId };

std::string_view to_string(InputMode mode);
/// Accepts "key_phrase" / "prompt_id". Throws ConfigError otherwise.
InputMode parse_input_mode(std::string_view text);

/// Conditioning segment, [SEP], then the answer tokens.
///
/// The encoder prepends its own [CLS] position, so a sequence of n tokens
/// occupies n + 1 encoder positions.
struct InputSequence {
  std::vector<int> token_ids;
  InputMode mode = InputMode::kKeyPhrase;
  std::string prompt_id;
  std::size_t separator_index = 0;  // position of [SEP] in token_ids
};

/// Key phrases joined by `delimiter`, order preserved.
std::string build_key_phrase_sequence(const Prompt& prompt, std::string_view delimiter = ", ");

class InputBuilder {
 public:
  /// `max_sequence_length` counts encoder positions, including [CLS].
  InputBuilder(std::shared_ptr<const Tokenizer> tokenizer, int max_sequence_length,
               std::string delimiter = ", ");

  /// Truncates the answer tail when over length; the conditioning segment is
  /// never cut. Throws ConfigError if the conditioning segment alone does not fit.
  InputSequence build(const Prompt& prompt, std::string_view answer_text, InputMode mode) const;

  const Tokenizer& tokenizer() const { return *tokenizer_; }
  const std::shared_ptr<const Tokenizer>& shared_tokenizer() const { return tokenizer_; }
  int max_sequence_length() const { return max_sequence_length_; }
  const std::string& delimiter() const { return delimiter_; }

 private:
  std::shared_ptr<const Tokenizer> tokenizer_;
  int max_sequence_length_;
  std::string delimiter_;
};

}  // namespace cpft
