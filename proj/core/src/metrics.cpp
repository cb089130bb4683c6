// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpft/errors.hpp"

namespace cpft {

double qwk(std::span<const int> gold, std::span<const int> pred, int min_score, int max_score) {
  if (gold.empty() || gold.size() != pred.size()) {
    throw ArgumentError("qwk needs two non-empty rating lists of equal length");
  }
  if (min_score > max_score) throw ArgumentError("qwk: min_score exceeds max_score");
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < min_score || gold[i] > max_score || pred[i] < min_score ||
        pred[i] > max_score) {
      throw RangeError("qwk: rating outside [" + std::to_string(min_score) + ", " +
                       std::to_string(max_score) + "]");
    }
  }
  const auto k = static_cast<std::size_t>(max_score - min_score + 1);
  std::vector<double> observed(k * k, 0.0);
  std::vector<double> gold_hist(k, 0.0);
  std::vector<double> pred_hist(k, 0.0);
  for (std::size_t n = 0; n < gold.size(); ++n) {
    const auto g = static_cast<std::size_t>(gold[n] - min_score);
    const auto p = static_cast<std::size_t>(pred[n] - min_score);
    observed[g * k + p] += 1.0;
    gold_hist[g] += 1.0;
    pred_hist[p] += 1.0;
  }
  const double total = static_cast<double>(gold.size());
  double numerator = 0.0;
  double denominator = 0.0;
  if (k > 1) {
    const double norm = static_cast<double>((k - 1) * (k - 1));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double d = static_cast<double>(i) - static_cast<double>(j);
        const double w = d * d / norm;
        numerator += w * observed[i * k + j];
        denominator += w * gold_hist[i] * pred_hist[j] / total;
      }
    }
  }
  if (denominator == 0.0) {
    return std::equal(gold.begin(), gold.end(), pred.begin()) ? 1.0 : 0.0;
  }
  return 1.0 - numerator / denominator;
}

Evaluation evaluate_model(const ScoringModel& model, const Prompt& prompt,
                          std::span<const Answer> answers, InputMode mode) {
  if (answers.empty()) throw ArgumentError("evaluate_model needs at least one answer");
  Evaluation evaluation;
  evaluation.predictions.reserve(answers.size());
  std::vector<int> gold;
  std::vector<int> pred;
  for (const Answer& answer : answers) {
    if (answer.prompt_id != prompt.prompt_id) {
      throw ArgumentError("answer " + answer.answer_id + " belongs to prompt " +
                          answer.prompt_id + ", not " + prompt.prompt_id);
    }
    ScoredAnswer scored;
    scored.answer_id = answer.answer_id;
    scored.predicted = model.predict_score(model.build_input(prompt, answer.text, mode));
    scored.predicted_raw = rescale_to_raw(scored.predicted, prompt.max_score);
    scored.gold_raw = answer.raw_score;
    gold.push_back(scored.gold_raw);
    pred.push_back(scored.predicted_raw);
    evaluation.predictions.push_back(std::move(scored));
  }
  evaluation.qwk = qwk(gold, pred, 0, prompt.max_score);
  return evaluation;
}

namespace {

std::u32string to_code_points(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t length = 1;
    char32_t cp = lead;
    if ((lead >> 5) == 0x6) {
      length = 2;
      cp = lead & 0x1F;
    } else if ((lead >> 4) == 0xE) {
      length = 3;
      cp = lead & 0x0F;
    } else if ((lead >> 3) == 0x1E) {
      length = 4;
      cp = lead & 0x07;
    }
    if (i + length > text.size()) {  // truncated sequence: count the byte as-is
      length = 1;
      cp = lead;
    }
    for (std::size_t b = 1; b < length; ++b) {
      cp = (cp << 6) | (static_cast<unsigned char>(text[i + b]) & 0x3F);
    }
    out.push_back(cp);
    i += length;
  }
  return out;
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const std::u32string s = to_code_points(a);
  const std::u32string t = to_code_points(b);
  // Single rolling row.
  std::vector<std::size_t> row(t.size() + 1);
  for (std::size_t j = 0; j <= t.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const std::size_t above = row[j];
      const std::size_t substitute = diagonal + (s[i - 1] == t[j - 1] ? 0 : 1);
      row[j] = std::min({above + 1, row[j - 1] + 1, substitute});
      diagonal = above;
    }
  }
  return row[t.size()];
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(to_code_points(a).size(), to_code_points(b).size());
  if (longest == 0) return 0.0;
  return static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

std::string_view to_string(CueAggregation aggregation) {
  return aggregation == CueAggregation::kMinOverPhrases ? "min" : "joined";
}

CueAggregation parse_cue_aggregation(std::string_view text) {
  if (text == "min") return CueAggregation::kMinOverPhrases;
  if (text == "joined") return CueAggregation::kJoinedSequence;
  throw ConfigError("unknown cue aggregation \"" + std::string(text) +
                    "\" (expected min or joined)");
}

std::optional<double> cue_distance(const Answer& answer, const Prompt& prompt,
                                   CueAggregation aggregation, std::string_view delimiter) {
  if (!answer.justification_cue) return std::nullopt;
  const std::string& cue = *answer.justification_cue;
  if (aggregation == CueAggregation::kJoinedSequence) {
    return normalized_edit_distance(cue, build_key_phrase_sequence(prompt, delimiter));
  }
  double best = 1.0;
  for (const auto& phrase : prompt.key_phrases) {
    best = std::min(best, normalized_edit_distance(cue, phrase));
  }
  return best;
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ArgumentError("pearson_r needs two lists of equal length >= 2");
  }
  // Welford-style streaming co-moments.
  double mean_x = 0.0;
  double mean_y = 0.0;
  double m2_x = 0.0;
  double m2_y = 0.0;
  double c_xy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double dx = xs[i] - mean_x;
    mean_x += dx / n;
    const double dy = ys[i] - mean_y;
    mean_y += dy / n;
    m2_x += dx * (xs[i] - mean_x);
    m2_y += dy * (ys[i] - mean_y);
    c_xy += dx * (ys[i] - mean_y);
  }
  if (m2_x <= 0.0 || m2_y <= 0.0) {
    throw UndefinedCorrelationError("pearson_r: zero variance");
  }
  return std::clamp(c_xy / std::sqrt(m2_x * m2_y), -1.0, 1.0);
}

}  // namespace cpft
