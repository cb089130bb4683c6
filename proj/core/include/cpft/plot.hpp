// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

// Headless SVG rendering for sweep aggregates and distance studies.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cpft/analysis.hpp"
#include "cpft/experiments.hpp"

namespace cpft {

struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> stddev;  // band is mean +/- stddev
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label = "QWK";
  bool log_x = true;
  std::vector<LineSeries> series;
};

struct ScatterChart {
  std::string title;
  std::string x_label = "normalized edit distance";
  std::string y_label = "predicted score";
  std::string color_label = "absolute error";
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> color;  // mapped onto a blue-to-red ramp over [0, max]
};

enum class AggregateAxis { kNTrain, kPromptCount };

/// One series per setting, points ordered by the chosen axis. Rows missing the
/// axis value are skipped.
LineChart line_chart_from_aggregate(std::span<const AggregateCsvRow> rows, AggregateAxis axis);
ScatterChart scatter_from_distance(std::span<const DistanceRow> rows);

std::string render_svg(const LineChart& chart);
std::string render_svg(const ScatterChart& chart);

void write_svg(const std::string& svg, const std::filesystem::path& path);

}  // namespace cpft
