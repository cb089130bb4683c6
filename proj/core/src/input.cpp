// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/input.hpp"

#include "cpft/errors.hpp"

namespace cpft {

std::string_view to_string(InputMode mode) {
  return mode == InputMode::kKeyPhrase ? "key_phrase" : "prompt_id";
}

InputMode parse_input_mode(std::string_view text) {
  if (text == "key_phrase") return InputMode::kKeyPhrase;
  if (text == "prompt_id") return InputMode::kPromptId;
  throw ConfigError("unknown input mode \"" + std::string(text) +
                    "\" (expected key_phrase or prompt_id)");
}

std::string build_key_phrase_sequence(const Prompt& prompt, std::string_view delimiter) {
  std::string out;
  for (std::size_t i = 0; i < prompt.key_phrases.size(); ++i) {
    if (i > 0) out += delimiter;
    out += prompt.key_phrases[i];
  }
  return out;
}

InputBuilder::InputBuilder(std::shared_ptr<const Tokenizer> tokenizer, int max_sequence_length,
                           std::string delimiter)
    : tokenizer_(std::move(tokenizer)),
      max_sequence_length_(max_sequence_length),
      delimiter_(std::move(delimiter)) {
  if (!tokenizer_) throw ConfigError("InputBuilder needs a tokenizer");
  if (max_sequence_length_ < 8) throw ConfigError("max_sequence_length must be >= 8");
}

InputSequence InputBuilder::build(const Prompt& prompt, std::string_view answer_text,
                                  InputMode mode) const {
  InputSequence sequence;
  sequence.mode = mode;
  sequence.prompt_id = prompt.prompt_id;
  if (mode == InputMode::kKeyPhrase) {
    sequence.token_ids = tokenizer_->encode(build_key_phrase_sequence(prompt, delimiter_));
  } else {
    sequence.token_ids = {tokenizer_->prompt_token(prompt.prompt_id)};
  }
  sequence.separator_index = sequence.token_ids.size();
  sequence.token_ids.push_back(Tokenizer::kSep);

  // One position is reserved for the encoder's [CLS].
  const auto budget = static_cast<std::size_t>(max_sequence_length_ - 1);
  if (sequence.token_ids.size() > budget) {
    throw ConfigError("key-phrase segment of prompt " + prompt.prompt_id + " needs " +
                      std::to_string(sequence.token_ids.size() + 1) +
                      " positions, max_sequence_length is " +
                      std::to_string(max_sequence_length_));
  }
  const std::vector<int> answer = tokenizer_->encode(answer_text);
  const std::size_t room = budget - sequence.token_ids.size();
  const std::size_t keep = std::min(room, answer.size());
  sequence.token_ids.insert(sequence.token_ids.end(), answer.begin(), answer.begin() + keep);
  return sequence;
}

}  // namespace cpft
