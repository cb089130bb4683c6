// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/corpus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "cpft/errors.hpp"
#include "fixtures.hpp"

namespace cpft {
namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

constexpr const char* kPrompts =
    R"({"prompt_id": "P1", "max_score": 2, "key_phrases": ["red apple", "green pear"], "question_text": null}
{"prompt_id": "P2", "max_score": 3, "key_phrases": ["blue sky"], "question_text": "Sky?"}
)";

constexpr const char* kAnswers =
    R"({"answer_id": "a1", "prompt_id": "P1", "text": "a red apple", "score": 1, "justification_cue": "red apple"}
{"answer_id": "a2", "prompt_id": "P1", "text": "", "score": 0, "justification_cue": null}
{"answer_id": "b1", "prompt_id": "P2", "text": "blue sky", "score": 3, "justification_cue": "blue sky"}
{"answer_id": "b2", "prompt_id": "P2", "text": "sky", "score": 1, "justification_cue": null}
)";

TEST(LoadDataset, ParsesValidFiles) {
  testing::TempDir dir("corpus");
  write_file(dir.path() / "p.jsonl", kPrompts);
  write_file(dir.path() / "a.jsonl", kAnswers);
  const Dataset data = load_dataset(dir.path() / "p.jsonl", dir.path() / "a.jsonl");
  EXPECT_EQ(data.prompts().size(), 2u);
  EXPECT_EQ(data.answers().size(), 4u);
  EXPECT_EQ(data.prompt("P2").question_text.value(), "Sky?");
  EXPECT_FALSE(data.prompt("P1").question_text.has_value());
  EXPECT_EQ(data.answers_for("P1").size(), 2u);
  EXPECT_FALSE(data.has_splits());
}

TEST(LoadDataset, SaveRoundTripIsByteStable) {
  testing::TempDir dir("corpus");
  write_file(dir.path() / "p.jsonl", kPrompts);
  write_file(dir.path() / "a.jsonl", kAnswers);
  const Dataset data = load_dataset(dir.path() / "p.jsonl", dir.path() / "a.jsonl");
  save_dataset(data, dir.path() / "p2.jsonl", dir.path() / "a2.jsonl");
  const Dataset again = load_dataset(dir.path() / "p2.jsonl", dir.path() / "a2.jsonl");
  save_dataset(again, dir.path() / "p3.jsonl", dir.path() / "a3.jsonl");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir.path() / "a2.jsonl"), slurp(dir.path() / "a3.jsonl"));
  EXPECT_EQ(slurp(dir.path() / "p2.jsonl"), slurp(dir.path() / "p3.jsonl"));
  ASSERT_EQ(again.answers().size(), data.answers().size());
  for (std::size_t i = 0; i < data.answers().size(); ++i) {
    EXPECT_EQ(again.answers()[i].text, data.answers()[i].text);
    EXPECT_EQ(again.answers()[i].justification_cue, data.answers()[i].justification_cue);
  }
}

TEST(LoadDataset, MalformedLineNamesLineNumber) {
  testing::TempDir dir("corpus");
  write_file(dir.path() / "p.jsonl", kPrompts);
  write_file(dir.path() / "a.jsonl",
             std::string(kAnswers).substr(0, std::string(kAnswers).find('\n') + 1) + "{oops\n");
  try {
    load_dataset(dir.path() / "p.jsonl", dir.path() / "a.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Dataset, ValidationErrors) {
  const Prompt p{"P", 2, {"x"}, std::nullopt};
  EXPECT_THROW(Dataset({p}, {{"a", "P", "t", 3, std::nullopt}}), ValidationError);
  EXPECT_THROW(Dataset({p}, {{"a", "Q", "t", 1, std::nullopt}}), ValidationError);
  EXPECT_THROW(Dataset({p}, {{"a", "P", "t", 1, std::string()}}), ValidationError);
  EXPECT_THROW(Dataset({p, p}, {}), ValidationError);
  EXPECT_THROW(Dataset({{"P", 0, {"x"}, std::nullopt}}, {}), ValidationError);
  EXPECT_THROW(Dataset({{"P", 1, {}, std::nullopt}}, {}), ValidationError);
  EXPECT_THROW(Dataset({p}, {{"a", "P", "t", 1, std::nullopt}, {"a", "P", "u", 1, std::nullopt}}),
               ValidationError);
  EXPECT_NO_THROW(Dataset({p}, {{"a", "P", "", 0, std::nullopt}}));
}

TEST(Scores, NormalizeExamples) {
  EXPECT_DOUBLE_EQ(normalize_score(0, 3), 0.0);
  EXPECT_NEAR(normalize_score(1, 3), 0.33, 0.005);
  EXPECT_DOUBLE_EQ(normalize_score(2, 2), 1.0);
  EXPECT_THROW(normalize_score(4, 3), RangeError);
  EXPECT_THROW(normalize_score(-1, 3), RangeError);
  EXPECT_THROW(normalize_score(0, 0), RangeError);
}

TEST(Scores, RescaleExamples) {
  EXPECT_EQ(rescale_to_raw(0.5, 2), 1);
  EXPECT_EQ(rescale_to_raw(0.0, 5), 0);
  EXPECT_EQ(rescale_to_raw(0.49, 3), 1);
  EXPECT_EQ(rescale_to_raw(1.0, 3), 3);
  EXPECT_THROW(rescale_to_raw(1.2, 3), RangeError);
  EXPECT_THROW(rescale_to_raw(-0.1, 3), RangeError);
  EXPECT_THROW(rescale_to_raw(std::nan(""), 3), RangeError);
}

TEST(Scores, RoundTripIsIdentity) {
  for (int m = 1; m <= 10; ++m) {
    for (int raw = 0; raw <= m; ++raw) EXPECT_EQ(rescale_to_raw(normalize_score(raw, m), m), raw);
  }
}

TEST(Scores, RescaleMatchesBoundaryEnumeration) {
  // Between consecutive half-integer boundaries (k - 0.5, k + 0.5) / m the raw
  // score is k; the boundaries themselves round away from zero.
  for (int m = 1; m <= 10; ++m) {
    for (int step = 0; step <= 1000; ++step) {
      const double p = step / 1000.0;
      int expected = 0;
      for (int k = 0; k <= m; ++k) {
        if (p * m >= k - 0.5) expected = k;
      }
      EXPECT_EQ(rescale_to_raw(p, m), expected) << "p=" << p << " m=" << m;
    }
  }
}

Dataset many_answers(int n_prompts, int per_prompt) {
  std::vector<Prompt> prompts;
  std::vector<Answer> answers;
  for (int p = 0; p < n_prompts; ++p) {
    const std::string id = "P" + std::to_string(p);
    prompts.push_back({id, 2, {"x"}, std::nullopt});
    for (int i = 0; i < per_prompt; ++i) {
      answers.push_back({id + "-" + std::to_string(i), id, "t", i % 3, std::nullopt});
    }
  }
  return Dataset(std::move(prompts), std::move(answers));
}

TEST(MakeSplits, SizesDisjointAndDeterministic) {
  const Dataset data = many_answers(2, 500);
  const Dataset a = make_splits(data, {200, 50, 250}, 0);
  const Dataset b = make_splits(data, {200, 50, 250}, 0);
  EXPECT_EQ(a.splits(), b.splits());
  for (const std::string& id : data.prompt_ids()) {
    EXPECT_EQ(a.answers_for(id, Split::kTrain).size(), 200u);
    EXPECT_EQ(a.answers_for(id, Split::kDev).size(), 50u);
    EXPECT_EQ(a.answers_for(id, Split::kTest).size(), 250u);
  }
  EXPECT_EQ(a.splits().size(), 1000u);
  const Dataset c = make_splits(data, {200, 50, 250}, 1);
  EXPECT_NE(a.splits(), c.splits());
}

TEST(MakeSplits, UnassignedRemainderAndSizingError) {
  const Dataset data = many_answers(1, 100);
  const Dataset part = make_splits(data, {10, 5, 5}, 3);
  EXPECT_EQ(part.splits().size(), 20u);
  try {
    make_splits(data, {200, 50, 250}, 0);
    FAIL() << "expected SizingError";
  } catch (const SizingError& e) {
    EXPECT_NE(std::string(e.what()).find("P0"), std::string::npos);
  }
}

TEST(Dataset, RestrictToKeepsSplits) {
  const Dataset data = make_splits(many_answers(3, 30), {10, 10, 10}, 0);
  const std::vector<std::string> keep{"P1"};
  const Dataset sub = data.restrict_to(keep);
  EXPECT_EQ(sub.prompt_ids(), keep);
  EXPECT_EQ(sub.answers().size(), 30u);
  EXPECT_EQ(sub.splits().size(), 30u);
  EXPECT_THROW(sub.prompt("P0"), ArgumentError);
}

}  // namespace
}  // namespace cpft
