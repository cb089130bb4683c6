// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

// Reference implementations used only by tests. Each one takes a different
// route from the library code it checks.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace cpft::oracle {

/// Quadratic kappa from pairwise disagreements: the observed term pairs each
/// gold rating with its own prediction, the chance term pairs every gold
/// rating with every prediction. The (N-1)^2 weight normalizer cancels.
inline double qwk_pairwise(const std::vector<int>& gold, const std::vector<int>& pred) {
  const double n = static_cast<double>(gold.size());
  double observed = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const double d = gold[i] - pred[i];
    observed += d * d;
  }
  observed /= n;
  double expected = 0.0;
  for (int g : gold) {
    for (int p : pred) expected += static_cast<double>((g - p) * (g - p));
  }
  expected /= n * n;
  if (expected == 0.0) return gold == pred ? 1.0 : 0.0;
  return 1.0 - observed / expected;
}

inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = c < 0x80 ? 0 : c < 0xE0 ? 1 : c < 0xF0 ? 2 : 3;
    char32_t cp = extra == 0 ? c : extra == 1 ? (c & 0x1F) : extra == 2 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k <= extra; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

/// Full (m+1) x (n+1) Levenshtein table.
inline std::size_t levenshtein_table(std::string_view a8, std::string_view b8) {
  const std::u32string a = decode_utf8(a8);
  const std::u32string b = decode_utf8(b8);
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[a.size()][b.size()];
}

inline double normalized_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(decode_utf8(a).size(), decode_utf8(b).size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein_table(a, b)) / static_cast<double>(longest);
}

/// Two-pass Pearson correlation.
inline double pearson_two_pass(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double mse_naive(const std::vector<double>& pred, const std::vector<double>& target) {
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::pow(target[i] - pred[i], 2);
  return total / static_cast<double>(pred.size());
}

/// Mean and population standard deviation.
inline std::pair<double, double> mean_pstd(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double var = std::max(0.0, sq / static_cast<double>(v.size()) - mean * mean);
  return {mean, std::sqrt(var)};
}

}  // namespace cpft::oracle

namespace cpft::oracle {

/// Textbook weighted kappa: explicit observed matrix, explicit expected matrix.
inline double qwk_contingency(const std::vector<int>& gold, const std::vector<int>& pred,
                              int lo, int hi) {
  const int k = hi - lo + 1;
  std::vector<std::vector<double>> observed(k, std::vector<double>(k, 0.0));
  std::vector<double> hist_gold(k, 0.0), hist_pred(k, 0.0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    observed[gold[i] - lo][pred[i] - lo] += 1.0;
    hist_gold[gold[i] - lo] += 1.0;
    hist_pred[pred[i] - lo] += 1.0;
  }
  const double n = static_cast<double>(gold.size());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double w = k == 1 ? 0.0 : static_cast<double>((i - j) * (i - j)) / ((k - 1) * (k - 1));
      num += w * observed[i][j];
      den += w * hist_gold[i] * hist_pred[j] / n;
    }
  }
  if (den == 0.0) return gold == pred ? 1.0 : 0.0;
  return 1.0 - num / den;
}

}  // namespace cpft::oracle
