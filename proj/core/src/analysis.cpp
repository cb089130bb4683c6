// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpft/errors.hpp"
#include "json_io.hpp"

namespace cpft {

namespace {

std::vector<Answer> evaluated_answers(const Dataset& target, std::string_view prompt_id) {
  return target.has_splits() ? target.answers_for(prompt_id, Split::kTest)
                             : target.answers_for(prompt_id);
}

void check_unseen(const ScoringModel& model, std::string_view prompt_id) {
  if (model.trained_prompts().contains(std::string(prompt_id))) {
    throw AnalysisError("model was trained on prompt " + std::string(prompt_id) +
                        "; zero-shot analysis needs an unseen prompt");
  }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

Evaluation zero_shot_eval(const ScoringModel& pre_finetuned, const Dataset& target,
                          std::string_view prompt_id, InputMode mode) {
  check_unseen(pre_finetuned, prompt_id);
  const std::vector<Answer> answers = evaluated_answers(target, prompt_id);
  return evaluate_model(pre_finetuned, target.prompt(prompt_id), answers, mode);
}

DistanceStudy distance_prediction_study(const ScoringModel& pre_finetuned, const Dataset& target,
                                        std::string_view prompt_id, InputMode mode,
                                        CueAggregation aggregation) {
  check_unseen(pre_finetuned, prompt_id);
  const Prompt& prompt = target.prompt(prompt_id);
  const std::string& delimiter = pre_finetuned.input_builder().delimiter();
  DistanceStudy study;
  study.aggregation = aggregation;
  for (const Answer& answer : evaluated_answers(target, prompt_id)) {
    const std::optional<double> distance = cue_distance(answer, prompt, aggregation, delimiter);
    if (!distance) {
      ++study.excluded;
      continue;
    }
    DistanceRow row;
    row.answer_id = answer.answer_id;
    row.distance = *distance;
    row.pred_norm =
        pre_finetuned.predict_score(pre_finetuned.build_input(prompt, answer.text, mode));
    row.gold_norm = normalize_score(answer.raw_score, prompt.max_score);
    row.abs_err = std::abs(row.pred_norm - row.gold_norm);
    study.rows.push_back(std::move(row));
  }
  if (study.rows.size() < 2) {
    throw AnalysisError("distance study on prompt " + std::string(prompt_id) + " has " +
                        std::to_string(study.rows.size()) + " usable rows, needs 2");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const DistanceRow& row : study.rows) {
    xs.push_back(row.distance);
    ys.push_back(row.pred_norm);
  }
  try {
    study.r = pearson_r(xs, ys);
  } catch (const UndefinedCorrelationError& e) {
    throw AnalysisError(std::string("distance study: ") + e.what());
  }
  return study;
}

void write_distance_csv(const DistanceStudy& study, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  out << "answer_id,distance,pred_norm,gold_norm,abs_err\n";
  char line[160];
  for (const DistanceRow& row : study.rows) {
    // %.17g keeps the values exact so r is recomputable from the file.
    std::snprintf(line, sizeof(line), ",%.17g,%.17g,%.17g,%.17g\n", row.distance, row.pred_norm,
                  row.gold_norm, row.abs_err);
    out << row.answer_id << line;
  }
}

void write_distance_json(const DistanceStudy& study, const std::filesystem::path& path) {
  detail::Json doc;
  doc["r"] = study.r;
  doc["rows"] = study.rows.size();
  doc["excluded"] = study.excluded;
  doc["aggregation"] = std::string(to_string(study.aggregation));
  std::ofstream out = open_for_write(path);
  out << doc.dump(2) << '\n';
}

std::vector<DistanceRow> read_distance_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<DistanceRow> rows;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream fields(line);
    DistanceRow row;
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ParseError(path.string(), line_number, "expected 5 columns");
    try {
      row.answer_id = cells[0];
      row.distance = std::stod(cells[1]);
      row.pred_norm = std::stod(cells[2]);
      row.gold_norm = std::stod(cells[3]);
      row.abs_err = std::stod(cells[4]);
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_number, "non-numeric field");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_predictions_csv(const Evaluation& evaluation, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  out << "answer_id,predicted,predicted_raw,gold_raw\n";
  char line[96];
  for (const ScoredAnswer& scored : evaluation.predictions) {
    std::snprintf(line, sizeof(line), ",%.17g,%d,%d\n", scored.predicted, scored.predicted_raw,
                  scored.gold_raw);
    out << scored.answer_id << line;
  }
}

}  // namespace cpft
