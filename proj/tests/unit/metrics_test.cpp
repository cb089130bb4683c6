// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cpft/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace cpft {
namespace {

std::vector<int> random_ratings(std::mt19937_64& gen, int lo, int hi, std::size_t n) {
  std::uniform_int_distribution<int> dist(lo, hi);
  std::vector<int> v(n);
  for (int& x : v) x = dist(gen);
  return v;
}

std::string random_string(std::mt19937_64& gen) {
  static const std::vector<std::string> alphabet{"a", "b", "c", "d", "é", "日", "本", " "};
  std::uniform_int_distribution<std::size_t> len(0, 12);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  for (std::size_t i = len(gen); i > 0; --i) s += alphabet[pick(gen)];
  return s;
}

TEST(Qwk, PerfectAgreementIsOne) {
  const std::vector<int> g{0, 1, 2, 3};
  EXPECT_DOUBLE_EQ(qwk(g, g, 0, 3), 1.0);
}

TEST(Qwk, FullReversalOnBinaryRangeIsMinusOne) {
  const std::vector<int> g{0, 0, 1, 1};
  const std::vector<int> p{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(qwk(g, p, 0, 1), -1.0);
}

TEST(Qwk, DegenerateConstantRaters) {
  const std::vector<int> same{2, 2, 2};
  EXPECT_DOUBLE_EQ(qwk(same, same, 0, 3), 1.0);
  const std::vector<int> other{1, 1, 1};
  EXPECT_DOUBLE_EQ(qwk(same, other, 0, 3), 0.0);
}

TEST(Qwk, RejectsBadInput) {
  const std::vector<int> a{0, 1};
  const std::vector<int> b{0};
  const std::vector<int> empty;
  EXPECT_THROW(qwk(a, b, 0, 1), ArgumentError);
  EXPECT_THROW(qwk(empty, empty, 0, 1), ArgumentError);
  const std::vector<int> out{0, 5};
  EXPECT_THROW(qwk(a, out, 0, 3), RangeError);
}

TEST(Qwk, MatchesBothOraclesOnRandomVectors) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_ratings(gen, 0, 4, 50);
    const auto p = random_ratings(gen, 0, 4, 50);
    const double got = qwk(g, p, 0, 4);
    EXPECT_NEAR(got, oracle::qwk_pairwise(g, p), 1e-10);
    EXPECT_NEAR(got, oracle::qwk_contingency(g, p, 0, 4), 1e-10);
  }
}

TEST(Qwk, SymmetryAndShiftInvariance) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_ratings(gen, 0, 3, 20);
    const auto p = random_ratings(gen, 0, 3, 20);
    EXPECT_NEAR(qwk(g, p, 0, 3), qwk(p, g, 0, 3), 1e-12);
    std::vector<int> gs = g, ps = p;
    for (int& x : gs) x += 2;
    for (int& x : ps) x += 2;
    EXPECT_NEAR(qwk(g, p, 0, 3), qwk(gs, ps, 2, 5), 1e-12);
    const double k = qwk(g, p, 0, 3);
    EXPECT_GE(k, -1.0);
    EXPECT_LE(k, 1.0);
  }
}

TEST(EditDistance, Examples) {
  EXPECT_DOUBLE_EQ(normalized_edit_distance("abc", "abc"), 0.0);
  EXPECT_DOUBLE_EQ(normalized_edit_distance("kitten", "sitting"), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(normalized_edit_distance("", "abcd"), 1.0);
  EXPECT_DOUBLE_EQ(normalized_edit_distance("", ""), 0.0);
  // Code points, not bytes.
  EXPECT_EQ(edit_distance("日本", "日"), 1u);
  EXPECT_DOUBLE_EQ(normalized_edit_distance("日本", "本本"), 0.5);
}

TEST(EditDistance, MatchesTableOracleExactly) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string a = random_string(gen);
    const std::string b = random_string(gen);
    EXPECT_EQ(edit_distance(a, b), oracle::levenshtein_table(a, b));
    EXPECT_EQ(normalized_edit_distance(a, b), oracle::normalized_levenshtein(a, b));
  }
}

TEST(EditDistance, MetricProperties) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string a = random_string(gen);
    const std::string b = random_string(gen);
    const double d = normalized_edit_distance(a, b);
    EXPECT_EQ(d, normalized_edit_distance(b, a));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_EQ(d == 0.0, a == b);
  }
}

TEST(CueDistance, MinOverPhrases) {
  const Prompt prompt{"P", 2, {"ab", "zzzz"}, std::nullopt};
  Answer answer{"x", "P", "ab", 1, std::string("ab")};
  EXPECT_DOUBLE_EQ(*cue_distance(answer, prompt), 0.0);
  answer.justification_cue = "zzzy";
  EXPECT_DOUBLE_EQ(*cue_distance(answer, prompt), 0.25);
  answer.justification_cue.reset();
  EXPECT_FALSE(cue_distance(answer, prompt).has_value());
}

TEST(CueDistance, JoinedSequenceUsesDelimiter) {
  const Prompt prompt{"P", 2, {"ab", "cd"}, std::nullopt};
  const Answer answer{"x", "P", "ab, cd", 2, std::string("ab, cd")};
  EXPECT_DOUBLE_EQ(*cue_distance(answer, prompt, CueAggregation::kJoinedSequence, ", "), 0.0);
  EXPECT_GT(*cue_distance(answer, prompt, CueAggregation::kMinOverPhrases), 0.0);
}

TEST(CueDistance, MatchesLoopOracleOnRandomInput) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    Prompt prompt{"P", 3, {}, std::nullopt};
    for (int k = 0; k < 3; ++k) {
      std::string phrase = random_string(gen);
      if (phrase.empty()) phrase = "a";
      prompt.key_phrases.push_back(phrase);
    }
    std::string cue = random_string(gen);
    if (cue.empty()) cue = "b";
    const Answer answer{"x", "P", cue, 1, cue};
    double best = 1.0;
    for (const std::string& phrase : prompt.key_phrases) {
      best = std::min(best, oracle::normalized_levenshtein(cue, phrase));
    }
    EXPECT_EQ(*cue_distance(answer, prompt), best);
  }
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y, z;
  for (double v : x) {
    y.push_back(2 * v + 1);
    z.push_back(-v);
  }
  EXPECT_NEAR(pearson_r(x, y), 1.0, 1e-15);
  EXPECT_NEAR(pearson_r(x, z), -1.0, 1e-15);
  const std::vector<double> flat{3, 3, 3, 3, 3};
  EXPECT_THROW(pearson_r(x, flat), UndefinedCorrelationError);
  const std::vector<double> one{1};
  EXPECT_THROW(pearson_r(one, one), ArgumentError);
}

TEST(Pearson, MatchesTwoPassOracle) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(100), y(100);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = normal(gen);
      y[i] = 0.3 * x[i] + normal(gen);
    }
    EXPECT_NEAR(pearson_r(x, y), oracle::pearson_two_pass(x, y), 1e-12);
  }
}

TEST(EvaluateModel, OutputsStayInRange) {
  const Dataset data = testing::tiny_dataset();
  const ScoringModel model =
      ScoringModel::create(testing::small_encoder(), testing::tokenizer_for(data), 1);
  for (const std::string& id : data.prompt_ids()) {
    const Prompt& prompt = data.prompt(id);
    const Evaluation e = evaluate_model(model, prompt, data.answers_for(id), InputMode::kKeyPhrase);
    ASSERT_EQ(e.predictions.size(), data.answers_for(id).size());
    std::vector<int> gold, pred;
    for (const ScoredAnswer& s : e.predictions) {
      EXPECT_GE(s.predicted_raw, 0);
      EXPECT_LE(s.predicted_raw, prompt.max_score);
      EXPECT_GT(s.predicted, 0.0);
      EXPECT_LT(s.predicted, 1.0);
      gold.push_back(s.gold_raw);
      pred.push_back(s.predicted_raw);
    }
    EXPECT_NEAR(e.qwk, oracle::qwk_pairwise(gold, pred), 1e-12);
  }
}

TEST(EvaluateModel, ExactPredictorScoresOne) {
  // A bag-of-embeddings model with zero encoder weights predicts sigmoid(b) for
  // every answer; with every gold score equal it agrees perfectly.
  const Prompt prompt{"P", 4, {"x"}, std::nullopt};
  const std::vector<Answer> answers{{"1", "P", "x y", 2, std::nullopt},
                                    {"2", "P", "y", 2, std::nullopt}};
  const Dataset data({prompt}, answers);
  ScoringModel model = ScoringModel::create(testing::small_encoder(EncoderKind::kBagOfEmbeddings),
                                            testing::tokenizer_for(data), 1);
  std::vector<double> zeros(static_cast<std::size_t>(model.hidden_size()), 0.0);
  model.set_head(zeros, 0.0);  // sigmoid(0) = 0.5 -> raw 2
  const Evaluation e = evaluate_model(model, prompt, answers, InputMode::kKeyPhrase);
  EXPECT_DOUBLE_EQ(e.qwk, 1.0);
}

}  // namespace
}  // namespace cpft
