// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "cpft/corpus.hpp"

namespace cpft {

/// Parameters of the synthetic scoring corpus.
///
/// Each prompt gets max_score key phrases built from a shared pool of
/// pseudo-words. An answer's score is the number of key phrases it contains;
/// included phrases may have words swapped for their synonym
/// (paraphrase_noise_rate), and words belonging to no key phrase of the prompt
/// are scattered in as distractors (distractor_rate per opportunity, with
/// max_score * phrase_length opportunities per answer). Each omitted phrase is
/// replaced by an equally long decoy of non-key words, so answer length does
/// not reveal the score.
struct SyntheticSpec {
  int num_prompts = 8;
  int answers_per_prompt = 100;
  int max_score = 3;
  std::uint64_t vocabulary_seed = 0;
  double paraphrase_noise_rate = 0.0;
  double distractor_rate = 0.0;

  int min_phrase_length = 1;
  int max_phrase_length = 3;
  int content_vocabulary_size = 300;
  int min_filler_words = 2;
  int max_filler_words = 6;

  /// Throws ValidationError describing the first bad field.
  void validate() const;
};

/// Deterministic in every SyntheticSpec field, including vocabulary_seed.
Dataset generate_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace cpft
