// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpft/encoder.hpp"
#include "cpft/input.hpp"
#include "cpft/tokenizer.hpp"

namespace cpft {

/// Encoder plus sigmoid regression head: score = sigmoid(w . enc(x) + b).
///
/// All trainable values (encoder and head) live in one flat vector so the
/// optimizer and gradient checks treat them uniformly. Copies are deep for the
/// parameters and share the immutable architecture and tokenizer; a model is
/// safe for concurrent read-only scoring.
class ScoringModel {
 public:
  /// Fresh model. For kPretrainedTransformer the encoder weights and vocabulary
  /// come from `config.pretrained_path` and `tokenizer` may be null.
  static ScoringModel create(const EncoderConfig& config,
                             std::shared_ptr<const Tokenizer> tokenizer, std::uint64_t init_seed,
                             std::string delimiter = ", ");

  /// Reads a checkpoint written by save(). Throws CheckpointError.
  static ScoringModel load(const std::filesystem::path& path);
  /// As load(), additionally requiring the stored hidden size to match `expected`.
  static ScoringModel load(const std::filesystem::path& path, const EncoderConfig& expected);

  void save(const std::filesystem::path& path) const;

  const EncoderConfig& encoder_config() const { return encoder_->config(); }
  int hidden_size() const { return encoder_->hidden_size(); }
  const Tokenizer& tokenizer() const { return builder_.tokenizer(); }
  const std::shared_ptr<const Tokenizer>& shared_tokenizer() const {
    return builder_.shared_tokenizer();
  }
  const InputBuilder& input_builder() const { return builder_; }

  InputSequence build_input(const Prompt& prompt, std::string_view answer_text,
                            InputMode mode) const {
    return builder_.build(prompt, answer_text, mode);
  }

  std::vector<double> encode(const InputSequence& input) const;
  /// Strictly inside (0, 1).
  double predict_score(const InputSequence& input) const;

  struct ForwardPass {
    double prediction = 0.0;
    std::unique_ptr<EncoderTape> tape;
  };
  ForwardPass forward(const InputSequence& input) const;
  /// Adds grad_prediction * d(prediction)/d(params) into `grad`.
  void backward(const ForwardPass& pass, double grad_prediction, std::span<double> grad) const;

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  const ParameterLayout& layout() const { return *layout_; }

  std::span<const double> head_weights() const;
  double head_bias() const;
  void set_head(std::span<const double> weights, double bias);

  /// Free-form string metadata persisted with the checkpoint (input mode, cache key, ...).
  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  /// Prompts whose answers have been used to train this model.
  const std::set<std::string>& trained_prompts() const { return trained_prompts_; }
  void add_trained_prompts(const std::set<std::string>& prompt_ids);

 private:
  ScoringModel(std::shared_ptr<const Encoder> encoder, std::shared_ptr<const ParameterLayout> layout,
               InputBuilder builder);

  std::shared_ptr<const Encoder> encoder_;
  std::shared_ptr<const ParameterLayout> layout_;
  InputBuilder builder_;
  std::vector<double> params_;
  std::size_t head_w_ = 0;
  std::size_t head_b_ = 0;
  std::map<std::string, std::string> metadata_;
  std::set<std::string> trained_prompts_;
};

inline constexpr int kCheckpointFormatVersion = 1;

}  // namespace cpft
