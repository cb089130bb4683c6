// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace cpft {

/// Seeded generator used for every random decision in the library.
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard.
/// The sampling helpers are written out here instead of using
/// std::uniform_int_distribution and friends, whose algorithms differ between
/// standard library implementations; this keeps generated corpora and splits
/// byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller.
  double normal();

  bool bernoulli(double p) { return uniform01() < p; }

  /// Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// FNV-1a over bytes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 14695981039346656037ULL);

/// Derives an independent child seed from a base seed and a label.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

}  // namespace cpft
