// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpft/input.hpp"
#include "cpft/rng.hpp"

namespace cpft {

enum class EncoderKind { kPretrainedTransformer, kTinyTransformer, kBagOfEmbeddings };

std::string_view to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view text);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kTinyTransformer;
  int hidden_size = 32;
  int max_sequence_length = 64;
  // Transformer kinds only.
  int num_layers = 2;
  int num_heads = 4;
  int ffn_size = 64;
  // kPretrainedTransformer: checkpoint whose encoder weights and vocabulary seed the model.
  std::string pretrained_path;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

/// Named row-major matrix inside a flat parameter vector.
struct ParamSlot {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

class ParameterLayout {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);
  const std::vector<ParamSlot>& slots() const { return slots_; }
  /// Throws ArgumentError for unknown names.
  const ParamSlot& slot(std::string_view name) const;
  std::size_t size() const { return size_; }

 private:
  std::vector<ParamSlot> slots_;
  std::size_t size_ = 0;
};

/// Activations retained by a training forward pass.
class EncoderTape {
 public:
  virtual ~EncoderTape() = default;
  std::vector<double> pooled;
};

/// Stateless encoder architecture; parameters live in an external flat vector
/// laid out by register_parameters().
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual const EncoderConfig& config() const = 0;
  int hidden_size() const { return config().hidden_size; }

  virtual void initialize(std::span<double> params, Rng& rng) const = 0;

  /// Pooled sequence vector of length hidden_size().
  virtual std::vector<double> encode(std::span<const double> params,
                                     const InputSequence& input) const = 0;

  virtual std::unique_ptr<EncoderTape> forward(std::span<const double> params,
                                               const InputSequence& input) const = 0;

  /// Adds d(loss)/d(params) into `grad` given d(loss)/d(pooled).
  virtual void backward(std::span<const double> params, const EncoderTape& tape,
                        std::span<const double> grad_pooled, std::span<double> grad) const = 0;
};

/// Creates the encoder for `config` and registers its parameters in `layout`.
std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config, std::size_t vocab_size,
                                      ParameterLayout& layout);

}  // namespace cpft
