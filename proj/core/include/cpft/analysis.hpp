// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpft/corpus.hpp"
#include "cpft/input.hpp"
#include "cpft/metrics.hpp"
#include "cpft/scoring_model.hpp"

namespace cpft {

/// Scores the target prompt's answers (its test split when the dataset carries
/// splits, otherwise all answers) with no target training. Throws
/// AnalysisError when the model has already been trained on the prompt.
Evaluation zero_shot_eval(const ScoringModel& pre_finetuned, const Dataset& target,
                          std::string_view prompt_id, InputMode mode);

struct DistanceRow {
  std::string answer_id;
  double distance = 0.0;
  double pred_norm = 0.0;
  double gold_norm = 0.0;
  double abs_err = 0.0;
};

struct DistanceStudy {
  std::vector<DistanceRow> rows;
  std::size_t excluded = 0;  // answers without a justification cue
  double r = 0.0;            // pearson_r(distance, pred_norm) over rows
  CueAggregation aggregation = CueAggregation::kMinOverPhrases;
};

/// One row per cue-bearing answer in the evaluated answers (same selection as
/// zero_shot_eval). Throws AnalysisError with fewer than two rows or when the
/// correlation is undefined.
DistanceStudy distance_prediction_study(
    const ScoringModel& pre_finetuned, const Dataset& target, std::string_view prompt_id,
    InputMode mode, CueAggregation aggregation = CueAggregation::kMinOverPhrases);

/// Header "answer_id,distance,pred_norm,gold_norm,abs_err".
void write_distance_csv(const DistanceStudy& study, const std::filesystem::path& path);
/// {"r", "rows", "excluded", "aggregation"}.
void write_distance_json(const DistanceStudy& study, const std::filesystem::path& path);
/// Reads a CSV written by write_distance_csv.
std::vector<DistanceRow> read_distance_csv(const std::filesystem::path& path);

/// Header "answer_id,predicted,predicted_raw,gold_raw".
void write_predictions_csv(const Evaluation& evaluation, const std::filesystem::path& path);

}  // namespace cpft
