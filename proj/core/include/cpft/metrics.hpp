// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpft/corpus.hpp"
#include "cpft/input.hpp"
#include "cpft/scoring_model.hpp"

namespace cpft {

/// Quadratic weighted kappa between two integer ratings over [min_score, max_score].
///
/// kappa = 1 - sum(w * O) / sum(w * E), w_ij = (i - j)^2 / (K - 1)^2, with O the
/// observed contingency matrix and E the outer product of the marginal
/// histograms scaled to the same total. When sum(w * E) is zero (both raters
/// constant) the result is 1.0 for identical sequences and 0.0 otherwise.
///
/// Throws ArgumentError on empty or mismatched input or min_score > max_score,
/// RangeError when a rating falls outside the range.
double qwk(std::span<const int> gold, std::span<const int> pred, int min_score, int max_score);

struct ScoredAnswer {
  std::string answer_id;
  double predicted = 0.0;  // normalized, in (0, 1)
  int predicted_raw = 0;   // rescaled to [0, max_score]
  int gold_raw = 0;
};

struct Evaluation {
  double qwk = 0.0;
  std::vector<ScoredAnswer> predictions;
};

/// Predicts every answer, rescales to the prompt's integer range and computes QWK
/// over [0, max_score] against the raw gold scores.
Evaluation evaluate_model(const ScoringModel& model, const Prompt& prompt,
                          std::span<const Answer> answers, InputMode mode);

/// Levenshtein distance over Unicode code points (UTF-8 input).
std::size_t edit_distance(std::string_view a, std::string_view b);

/// edit_distance / max(|a|, |b|) in code points; 0.0 when both are empty.
double normalized_edit_distance(std::string_view a, std::string_view b);

enum class CueAggregation {
  kMinOverPhrases,  // min distance between the cue and any single key phrase
  kJoinedSequence,  // distance between the cue and the delimiter-joined key phrases
};

std::string_view to_string(CueAggregation aggregation);
CueAggregation parse_cue_aggregation(std::string_view text);

/// nullopt when the answer carries no justification cue.
std::optional<double> cue_distance(const Answer& answer, const Prompt& prompt,
                                   CueAggregation aggregation = CueAggregation::kMinOverPhrases,
                                   std::string_view delimiter = ", ");

/// Sample Pearson correlation. Throws ArgumentError for mismatched or < 2 values,
/// UndefinedCorrelationError when either side has zero variance.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

}  // namespace cpft
