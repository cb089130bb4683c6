// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/synthetic.hpp"

#include <gtest/gtest.h>

#include <array>
#include <set>

#include "cpft/errors.hpp"
#include "fixtures.hpp"

namespace cpft {
namespace {

TEST(Synthetic, ZeroNoiseFullScoreContainsEveryPhrase) {
  SyntheticSpec spec;
  spec.num_prompts = 1;
  spec.answers_per_prompt = 4;
  spec.max_score = 2;
  const Dataset data = generate_synthetic_corpus(spec);
  for (const Answer& a : data.answers()) {
    if (a.raw_score != 2) continue;
    for (const std::string& phrase : data.prompt(a.prompt_id).key_phrases) {
      EXPECT_NE(a.text.find(phrase), std::string::npos) << a.text;
    }
  }
}

TEST(Synthetic, ZeroNoiseInvariantOnLargerCorpus) {
  SyntheticSpec spec = testing::small_synthetic(5, 200, 9);
  spec.paraphrase_noise_rate = 0.0;
  const Dataset data = generate_synthetic_corpus(spec);
  for (const Answer& a : data.answers()) {
    const Prompt& p = data.prompt(a.prompt_id);
    if (a.raw_score == p.max_score) {
      for (const std::string& phrase : p.key_phrases) {
        EXPECT_NE(a.text.find(phrase), std::string::npos);
      }
    }
    EXPECT_EQ(a.justification_cue.has_value(), a.raw_score > 0);
  }
}

TEST(Synthetic, Deterministic) {
  const SyntheticSpec spec = testing::small_synthetic();
  const Dataset a = generate_synthetic_corpus(spec);
  const Dataset b = generate_synthetic_corpus(spec);
  ASSERT_EQ(a.answers().size(), b.answers().size());
  for (std::size_t i = 0; i < a.answers().size(); ++i) {
    EXPECT_EQ(a.answers()[i].text, b.answers()[i].text);
    EXPECT_EQ(a.answers()[i].raw_score, b.answers()[i].raw_score);
  }
  SyntheticSpec other = spec;
  other.vocabulary_seed += 1;
  EXPECT_NE(generate_synthetic_corpus(other).answers()[0].text, a.answers()[0].text);
}

TEST(Synthetic, ScoresUniformWithinTwoPercent) {
  SyntheticSpec spec = testing::small_synthetic(10, 1000, 2);
  const Dataset data = generate_synthetic_corpus(spec);
  std::array<int, 4> counts{};
  for (const Answer& a : data.answers()) ++counts[static_cast<std::size_t>(a.raw_score)];
  for (int c : counts) EXPECT_NEAR(c / 10000.0, 0.25, 0.02);
}

TEST(Synthetic, AnswerLengthCarriesNoScoreSignal) {
  SyntheticSpec spec = testing::small_synthetic(6, 120, 4);
  spec.distractor_rate = 0.0;
  spec.min_filler_words = 3;
  spec.max_filler_words = 3;
  const Dataset data = generate_synthetic_corpus(spec);
  const auto word_count = [](const std::string& text) {
    std::size_t n = 1;
    for (char c : text) n += c == ' ' ? 1 : 0;
    return n;
  };
  for (const std::string& id : data.prompt_ids()) {
    const std::vector<Answer> answers = data.answers_for(id);
    std::set<int> scores;
    for (const Answer& a : answers) {
      scores.insert(a.raw_score);
      EXPECT_EQ(word_count(a.text), word_count(answers.front().text)) << a.text;
    }
    EXPECT_EQ(scores.size(), 4u);
  }
}

TEST(Synthetic, ValidationRejectsBadRates) {
  SyntheticSpec spec;
  spec.distractor_rate = 1.5;
  EXPECT_THROW(spec.validate(), ValidationError);
  spec.distractor_rate = 0.0;
  spec.paraphrase_noise_rate = -0.1;
  EXPECT_THROW(generate_synthetic_corpus(spec), ValidationError);
  spec.paraphrase_noise_rate = 0.0;
  spec.num_prompts = 0;
  EXPECT_THROW(spec.validate(), ValidationError);
}

TEST(Synthetic, CueIsIncludedPhrasesAndScoreCountsThem) {
  const Dataset data = generate_synthetic_corpus(testing::small_synthetic(3, 100, 4));
  for (const Answer& a : data.answers()) {
    if (!a.justification_cue) {
      EXPECT_EQ(a.raw_score, 0);
      continue;
    }
    int parts = 1;
    for (std::size_t pos = a.justification_cue->find(", "); pos != std::string::npos;
         pos = a.justification_cue->find(", ", pos + 2)) {
      ++parts;
    }
    EXPECT_EQ(parts, a.raw_score);
  }
}

}  // namespace
}  // namespace cpft
