// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/tokenizer.hpp"

#include <algorithm>
#include <set>

#include "cpft/errors.hpp"

namespace cpft {
namespace {

constexpr std::string_view kReserved[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

/// Length of the UTF-8 sequence starting with `lead` (1 for invalid bytes).
std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

char32_t decode(std::string_view bytes) {
  const auto b0 = static_cast<unsigned char>(bytes[0]);
  switch (bytes.size()) {
    case 2:
      return ((b0 & 0x1F) << 6) | (static_cast<unsigned char>(bytes[1]) & 0x3F);
    case 3:
      return ((b0 & 0x0F) << 12) | ((static_cast<unsigned char>(bytes[1]) & 0x3F) << 6) |
             (static_cast<unsigned char>(bytes[2]) & 0x3F);
    case 4:
      return ((b0 & 0x07) << 18) | ((static_cast<unsigned char>(bytes[1]) & 0x3F) << 12) |
             ((static_cast<unsigned char>(bytes[2]) & 0x3F) << 6) |
             (static_cast<unsigned char>(bytes[3]) & 0x3F);
    default:
      return b0;
  }
}

// CJK ideographs, kana, full-width forms and CJK punctuation stand alone.
bool is_standalone(char32_t cp) {
  return (cp >= 0x3000 && cp <= 0x30FF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0xFF00 && cp <= 0xFFEF);
}

bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

}  // namespace

Tokenizer::Tokenizer(std::vector<std::string> vocabulary) : vocabulary_(std::move(vocabulary)) {
  if (vocabulary_.size() < std::size(kReserved)) {
    throw ConfigError("vocabulary is missing reserved tokens");
  }
  for (std::size_t i = 0; i < std::size(kReserved); ++i) {
    if (vocabulary_[i] != kReserved[i]) {
      throw ConfigError("vocabulary entry " + std::to_string(i) + " must be " +
                        std::string(kReserved[i]));
    }
  }
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!index_.emplace(vocabulary_[i], static_cast<int>(i)).second) {
      throw ConfigError("duplicate vocabulary entry " + vocabulary_[i]);
    }
  }
}

Tokenizer Tokenizer::build(std::span<const std::string> texts,
                           std::span<const std::string> prompt_ids) {
  std::set<std::string> tokens;
  for (const auto& text : texts) {
    for (auto& token : split(text)) {
      tokens.insert(std::move(token));
    }
  }
  for (const auto& id : prompt_ids) {
    tokens.insert(prompt_token_text(id));
  }
  std::vector<std::string> vocabulary(std::begin(kReserved), std::end(kReserved));
  for (const auto& token : tokens) {
    if (std::find(std::begin(kReserved), std::end(kReserved), token) == std::end(kReserved)) {
      vocabulary.push_back(token);
    }
  }
  return Tokenizer(std::move(vocabulary));
}

std::vector<std::string> Tokenizer::split(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(std::move(word));
      word.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    const std::size_t length = std::min(utf8_length(lead), text.size() - i);
    if (length == 1) {
      const char c = text[i];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        flush();
      } else if (is_ascii_punct(c)) {
        flush();
        out.emplace_back(1, c);
      } else {
        word += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
      }
    } else {
      const std::string_view glyph = text.substr(i, length);
      const char32_t cp = decode(glyph);
      if (cp == 0x3000) {  // ideographic space
        flush();
      } else if (is_standalone(cp)) {
        flush();
        out.emplace_back(glyph);
      } else {
        word += glyph;
      }
    }
    i += length;
  }
  flush();
  return out;
}

std::string Tokenizer::prompt_token_text(std::string_view prompt_id) {
  return "[PROMPT_" + std::string(prompt_id) + "]";
}

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& token : split(text)) {
    ids.push_back(id(token));
  }
  return ids;
}

int Tokenizer::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

int Tokenizer::prompt_token(std::string_view prompt_id) const {
  return id(prompt_token_text(prompt_id));
}

const std::string& Tokenizer::token(int id) const {
  return vocabulary_.at(static_cast<std::size_t>(id));
}

Tokenizer build_tokenizer(std::span<const Dataset> datasets) {
  std::vector<std::string> texts;
  std::vector<std::string> ids;
  for (const Dataset& dataset : datasets) {
    for (const auto& [id, prompt] : dataset.prompts()) {
      ids.push_back(id);
      texts.insert(texts.end(), prompt.key_phrases.begin(), prompt.key_phrases.end());
      if (prompt.question_text) texts.push_back(*prompt.question_text);
    }
    for (const Answer& answer : dataset.answers()) {
      texts.push_back(answer.text);
    }
  }
  return Tokenizer::build(texts, ids);
}

}  // namespace cpft
