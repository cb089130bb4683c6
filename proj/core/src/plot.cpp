// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpft/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cpft/errors.hpp"

namespace cpft {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

std::string label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", v);
  return buffer;
}

/// Maps data coordinates into the plot area.
struct Frame {
  double x_min, x_max, y_min, y_max;
  bool log_x;

  double px(double x) const {
    const double t = log_x ? (std::log(x) - std::log(x_min)) / (std::log(x_max) - std::log(x_min))
                           : (x - x_min) / (x_max - x_min);
    return kLeft + t * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * (kHeight - kTop - kBottom);
  }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& title,
          const std::string& x_label, const std::string& y_label,
          const std::vector<double>& x_ticks) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << x0 << "\" y1=\"" << kTop << "\" x2=\"" << x0 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
  for (double t : x_ticks) {
    svg << "<text x=\"" << num(f.px(t)) << "\" y=\"" << num(y0 + 16)
        << "\" text-anchor=\"middle\">" << label(t) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = f.y_min + (f.y_max - f.y_min) * i / 5.0;
    svg << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(f.py(v) + 4)
        << "\" text-anchor=\"end\">" << label(std::round(v * 100) / 100) << "</text>\n";
    svg << "<line x1=\"" << x0 << "\" y1=\"" << num(f.py(v)) << "\" x2=\"" << x1 << "\" y2=\""
        << num(f.py(v)) << "\" stroke=\"#dddddd\"/>\n";
  }
  svg << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 20)
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << num((kTop + y0) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
}

}  // namespace

LineChart line_chart_from_aggregate(std::span<const AggregateCsvRow> rows, AggregateAxis axis) {
  LineChart chart;
  chart.x_label = axis == AggregateAxis::kNTrain ? "training instances" : "number of prompts";
  chart.title = axis == AggregateAxis::kNTrain ? "QWK by finetuning size" : "QWK by prompt count";
  std::map<std::string, std::vector<const AggregateCsvRow*>> by_setting;
  std::vector<std::string> order;
  for (const AggregateCsvRow& row : rows) {
    const std::optional<int>& x = axis == AggregateAxis::kNTrain ? row.n_train : row.prompt_count;
    if (!x || *x <= 0) continue;
    if (!by_setting.contains(row.setting)) order.push_back(row.setting);
    by_setting[row.setting].push_back(&row);
  }
  for (const std::string& name : order) {
    auto points = by_setting[name];
    std::stable_sort(points.begin(), points.end(), [axis](const auto* a, const auto* b) {
      return axis == AggregateAxis::kNTrain ? *a->n_train < *b->n_train
                                            : *a->prompt_count < *b->prompt_count;
    });
    LineSeries series;
    series.name = name;
    for (const AggregateCsvRow* p : points) {
      series.x.push_back(axis == AggregateAxis::kNTrain ? *p->n_train : *p->prompt_count);
      series.mean.push_back(p->mean_qwk);
      series.stddev.push_back(p->std_qwk);
    }
    chart.series.push_back(std::move(series));
  }
  return chart;
}

ScatterChart scatter_from_distance(std::span<const DistanceRow> rows) {
  ScatterChart chart;
  chart.title = "Cue distance vs predicted score";
  for (const DistanceRow& row : rows) {
    chart.x.push_back(row.distance);
    chart.y.push_back(row.pred_norm);
    chart.color.push_back(row.abs_err);
  }
  return chart;
}

std::string render_svg(const LineChart& chart) {
  if (chart.series.empty()) throw ArgumentError("line chart has no series");
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  std::vector<double> ticks;
  for (const LineSeries& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.mean[i] - s.stddev[i]);
      y_max = std::max(y_max, s.mean[i] + s.stddev[i]);
      if (std::find(ticks.begin(), ticks.end(), s.x[i]) == ticks.end()) ticks.push_back(s.x[i]);
    }
  }
  if (ticks.empty()) throw ArgumentError("line chart has no points");
  const bool log_x = chart.log_x && x_min > 0.0;
  if (!(x_max > x_min)) {
    x_min = log_x ? x_min / 2 : x_min - 1;
    x_max = log_x ? x_max * 2 : x_max + 1;
  }
  widen(y_min, y_max);
  const double pad = 0.05 * (y_max - y_min);
  const Frame f{x_min, x_max, y_min - pad, y_max + pad, log_x};

  std::ostringstream svg;
  axes(svg, f, chart.title, chart.x_label, chart.y_label, ticks);
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const LineSeries& s = chart.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string band;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      band += num(f.px(s.x[i])) + "," + num(f.py(s.mean[i] + s.stddev[i])) + " ";
    }
    for (std::size_t i = s.x.size(); i-- > 0;) {
      band += num(f.px(s.x[i])) + "," + num(f.py(s.mean[i] - s.stddev[i])) + " ";
    }
    svg << "<polygon class=\"band\" points=\"" << band << "\" fill=\"" << color
        << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    std::string line;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      line += num(f.px(s.x[i])) + "," + num(f.py(s.mean[i])) + " ";
    }
    svg << "<polyline class=\"series\" data-name=\"" << escape(s.name) << "\" points=\"" << line
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      svg << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.mean[i]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
    svg << "<line x1=\"" << num(kWidth - kRight + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(kWidth - kRight + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(kWidth - kRight + 36) << "\" y=\"" << num(ly + 4) << "\">"
        << escape(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_svg(const ScatterChart& chart) {
  if (chart.x.empty() || chart.x.size() != chart.y.size() || chart.x.size() != chart.color.size()) {
    throw ArgumentError("scatter chart needs equal non-empty coordinate lists");
  }
  double x_min = *std::min_element(chart.x.begin(), chart.x.end());
  double x_max = *std::max_element(chart.x.begin(), chart.x.end());
  double y_min = std::min(0.0, *std::min_element(chart.y.begin(), chart.y.end()));
  double y_max = std::max(1.0, *std::max_element(chart.y.begin(), chart.y.end()));
  widen(x_min, x_max);
  const double c_max = std::max(1e-12, *std::max_element(chart.color.begin(), chart.color.end()));
  const Frame f{x_min, x_max, y_min, y_max, false};

  std::vector<double> ticks;
  for (int i = 0; i <= 4; ++i) {
    ticks.push_back(std::round((x_min + (x_max - x_min) * i / 4.0) * 100) / 100);
  }
  std::ostringstream svg;
  axes(svg, f, chart.title, chart.x_label, chart.y_label, ticks);
  for (std::size_t i = 0; i < chart.x.size(); ++i) {
    const double t = std::clamp(chart.color[i] / c_max, 0.0, 1.0);
    const int red = static_cast<int>(std::lround(255 * t));
    const int blue = 255 - red;
    char fill[16];
    std::snprintf(fill, sizeof(fill), "#%02x40%02x", red, blue);
    svg << "<circle class=\"point\" cx=\"" << num(f.px(chart.x[i])) << "\" cy=\""
        << num(f.py(chart.y[i])) << "\" r=\"3\" fill=\"" << fill
        << "\" fill-opacity=\"0.8\"/>\n";
  }
  // Color bar.
  const double bx = kWidth - kRight + 30;
  const double bh = kHeight - kTop - kBottom;
  for (int i = 0; i < 20; ++i) {
    const double t = 1.0 - i / 19.0;
    const int red = static_cast<int>(std::lround(255 * t));
    char fill[16];
    std::snprintf(fill, sizeof(fill), "#%02x40%02x", red, 255 - red);
    svg << "<rect x=\"" << num(bx) << "\" y=\"" << num(kTop + bh * i / 20.0)
        << "\" width=\"14\" height=\"" << num(bh / 20.0 + 0.5) << "\" fill=\"" << fill << "\"/>\n";
  }
  svg << "<text x=\"" << num(bx + 20) << "\" y=\"" << num(kTop + 10) << "\">" << label(c_max)
      << "</text>\n";
  svg << "<text x=\"" << num(bx + 20) << "\" y=\"" << num(kTop + bh) << "\">0</text>\n";
  svg << "<text transform=\"translate(" << num(bx + 70) << "," << num(kTop + bh / 2)
      << ") rotate(90)\" text-anchor=\"middle\">" << escape(chart.color_label) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::string& svg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << svg;
}

}  // namespace cpft
