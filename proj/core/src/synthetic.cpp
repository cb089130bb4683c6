// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <string>
#include <unordered_set>
#include <vector>

#include "cpft/errors.hpp"
#include "cpft/rng.hpp"

namespace cpft {
namespace {

constexpr std::array<const char*, 24> kFillerWords = {
    "the",  "a",     "it",   "is",   "and",  "because", "so",   "that",
    "this", "we",    "they", "of",   "to",   "in",      "which", "was",
    "be",   "not",   "very", "also", "when", "there",   "such", "their"};

constexpr std::array<const char*, 14> kOnsets = {"k", "t", "m", "n", "r", "s", "h",
                                                  "b", "d", "g", "p", "z", "ch", "sh"};
constexpr std::array<const char*, 5> kVowels = {"a", "e", "i", "o", "u"};

std::string pseudo_word(Rng& rng) {
  const int syllables = rng.uniform_int(2, 3);
  std::string word;
  for (int i = 0; i < syllables; ++i) {
    word += kOnsets[rng.uniform_index(kOnsets.size())];
    word += kVowels[rng.uniform_index(kVowels.size())];
  }
  return word;
}

std::string join(const std::vector<std::string>& words, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) {
      out += sep;
    }
    out += words[i];
  }
  return out;
}

void check_rate(double rate, const char* name) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ValidationError(std::string(name) + " must be in [0, 1], got " + std::to_string(rate));
  }
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_prompts < 1) throw ValidationError("num_prompts must be >= 1");
  if (answers_per_prompt < 1) throw ValidationError("answers_per_prompt must be >= 1");
  if (max_score < 1) throw ValidationError("max_score must be >= 1");
  check_rate(paraphrase_noise_rate, "paraphrase_noise_rate");
  check_rate(distractor_rate, "distractor_rate");
  if (min_phrase_length < 1 || max_phrase_length < min_phrase_length) {
    throw ValidationError("phrase length bounds must satisfy 1 <= min <= max");
  }
  if (min_filler_words < 0 || max_filler_words < min_filler_words) {
    throw ValidationError("filler bounds must satisfy 0 <= min <= max");
  }
  if (content_vocabulary_size < max_score * max_phrase_length + 1) {
    throw ValidationError("content_vocabulary_size must exceed max_score * max_phrase_length");
  }
}

Dataset generate_synthetic_corpus(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.vocabulary_seed);

  // Content words and their synonyms, all distinct from each other and from fillers.
  std::unordered_set<std::string> used(kFillerWords.begin(), kFillerWords.end());
  auto fresh_word = [&] {
    std::string word = pseudo_word(rng);
    while (used.contains(word)) {
      word = pseudo_word(rng);
    }
    used.insert(word);
    return word;
  };
  const auto vocab_size = static_cast<std::size_t>(spec.content_vocabulary_size);
  std::vector<std::string> content(vocab_size);
  std::vector<std::string> synonym(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    content[i] = fresh_word();
    synonym[i] = fresh_word();
  }

  const int id_width = spec.num_prompts > 1000 ? 4 : 3;
  const int answer_width = spec.answers_per_prompt >= 10000 ? 5 : 4;
  std::vector<std::size_t> vocab_order(vocab_size);

  std::vector<Prompt> prompts;
  std::vector<Answer> answers;
  answers.reserve(static_cast<std::size_t>(spec.num_prompts) * spec.answers_per_prompt);

  for (int p = 0; p < spec.num_prompts; ++p) {
    char id_buffer[16];
    std::snprintf(id_buffer, sizeof(id_buffer), "S%0*d", id_width, p);
    const std::string prompt_id = id_buffer;
    const int phrase_length = rng.uniform_int(spec.min_phrase_length, spec.max_phrase_length);
    const auto phrase_count = static_cast<std::size_t>(spec.max_score);

    for (std::size_t i = 0; i < vocab_size; ++i) vocab_order[i] = i;
    rng.shuffle(std::span<std::size_t>(vocab_order));
    std::vector<std::vector<std::size_t>> phrase_words(phrase_count);
    std::unordered_set<std::size_t> key_words;
    std::size_t cursor = 0;
    for (auto& words : phrase_words) {
      for (int w = 0; w < phrase_length; ++w) {
        words.push_back(vocab_order[cursor]);
        key_words.insert(vocab_order[cursor]);
        ++cursor;
      }
    }
    std::vector<std::size_t> distractor_pool;
    for (std::size_t i = 0; i < vocab_size; ++i) {
      if (!key_words.contains(i)) distractor_pool.push_back(i);
    }

    Prompt prompt;
    prompt.prompt_id = prompt_id;
    prompt.max_score = spec.max_score;
    for (const auto& words : phrase_words) {
      std::vector<std::string> text;
      for (const std::size_t w : words) text.push_back(content[w]);
      prompt.key_phrases.push_back(join(text, " "));
    }

    std::vector<std::size_t> phrase_order(phrase_count);
    for (int a = 0; a < spec.answers_per_prompt; ++a) {
      const int included = rng.uniform_int(0, spec.max_score);
      for (std::size_t i = 0; i < phrase_count; ++i) phrase_order[i] = i;
      rng.shuffle(std::span<std::size_t>(phrase_order));
      std::vector<std::size_t> chosen(phrase_order.begin(), phrase_order.begin() + included);
      std::sort(chosen.begin(), chosen.end());

      std::vector<std::vector<std::string>> segments;
      std::vector<std::string> cue_parts;
      for (const std::size_t k : chosen) {
        std::vector<std::string> words;
        for (const std::size_t w : phrase_words[k]) {
          words.push_back(rng.bernoulli(spec.paraphrase_noise_rate) ? synonym[w] : content[w]);
        }
        cue_parts.push_back(join(words, " "));
        segments.push_back(std::move(words));
      }
      // Every omitted phrase is replaced by a decoy of equal length built from
      // non-key words, so the content-token count carries no score signal and
      // scoring requires comparing against the rubric.
      for (int d = included; d < spec.max_score; ++d) {
        std::vector<std::string> words;
        for (int w = 0; w < phrase_length; ++w) {
          const std::size_t word = distractor_pool[rng.uniform_index(distractor_pool.size())];
          words.push_back(rng.bernoulli(spec.paraphrase_noise_rate) ? synonym[word] : content[word]);
        }
        segments.push_back(std::move(words));
      }
      const int fillers = rng.uniform_int(spec.min_filler_words, spec.max_filler_words);
      for (int f = 0; f < fillers; ++f) {
        segments.push_back({kFillerWords[rng.uniform_index(kFillerWords.size())]});
      }
      const int opportunities = spec.max_score * phrase_length;
      for (int d = 0; d < opportunities; ++d) {
        if (rng.bernoulli(spec.distractor_rate)) {
          segments.push_back({content[distractor_pool[rng.uniform_index(distractor_pool.size())]]});
        }
      }
      rng.shuffle(std::span<std::vector<std::string>>(segments));

      std::vector<std::string> tokens;
      for (const auto& segment : segments) {
        tokens.insert(tokens.end(), segment.begin(), segment.end());
      }
      char answer_buffer[32];
      std::snprintf(answer_buffer, sizeof(answer_buffer), "%s-%0*d", prompt_id.c_str(),
                    answer_width, a);
      Answer answer;
      answer.answer_id = answer_buffer;
      answer.prompt_id = prompt_id;
      answer.text = join(tokens, " ");
      answer.raw_score = included;
      if (!cue_parts.empty()) {
        answer.justification_cue = join(cue_parts, ", ");
      }
      answers.push_back(std::move(answer));
    }
    prompts.push_back(std::move(prompt));
  }
  return Dataset(std::move(prompts), std::move(answers));
}

}  // namespace cpft
