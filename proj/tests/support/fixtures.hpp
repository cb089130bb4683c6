// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cpft/corpus.hpp"
#include "cpft/scoring_model.hpp"
#include "cpft/synthetic.hpp"
#include "cpft/tokenizer.hpp"

namespace cpft::testing {

/// Two prompts, three answers each, all with cues except one score-0 answer.
inline Dataset tiny_dataset() {
  std::vector<Prompt> prompts{
      {"P1", 2, {"red apple", "green pear"}, std::nullopt},
      {"P2", 3, {"blue sky"}, std::string("What is above?")},
  };
  std::vector<Answer> answers{
      {"a1", "P1", "I like a red apple", 1, std::string("red apple")},
      {"a2", "P1", "red apple and green pear", 2, std::string("red apple, green pear")},
      {"a3", "P1", "nothing here", 0, std::nullopt},
      {"b1", "P2", "the blue sky", 3, std::string("blue sky")},
      {"b2", "P2", "a blue car", 1, std::string("blue")},
      {"b3", "P2", "grey skies", 2, std::string("skies")},
  };
  return Dataset(std::move(prompts), std::move(answers));
}

inline std::shared_ptr<const Tokenizer> tokenizer_for(const Dataset& data) {
  const std::array<Dataset, 1> all{data};
  return std::make_shared<const Tokenizer>(build_tokenizer(all));
}

inline EncoderConfig small_encoder(EncoderKind kind = EncoderKind::kTinyTransformer) {
  EncoderConfig c;
  c.kind = kind;
  c.hidden_size = 8;
  c.num_layers = 2;
  c.num_heads = 2;
  c.ffn_size = 12;
  c.max_sequence_length = 32;
  return c;
}

inline SyntheticSpec small_synthetic(int prompts = 6, int answers = 80, std::uint64_t seed = 5) {
  SyntheticSpec s;
  s.num_prompts = prompts;
  s.answers_per_prompt = answers;
  s.max_score = 3;
  s.vocabulary_seed = seed;
  s.paraphrase_noise_rate = 0.1;
  s.distractor_rate = 0.2;
  return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cpft-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace cpft::testing
