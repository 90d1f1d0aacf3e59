#pragma once

// Rendering: radar figures in absolute and relative scales (the two scales
// tell visibly different stories about the same numbers) and result tables
// with best / second-best highlighting.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "benchaudit/aggregate.hpp"
#include "benchaudit/errors.hpp"

namespace benchaudit {

enum class RadarMode { ABSOLUTE, RELATIVE };

inline const char *to_string(RadarMode m) {
  return m == RadarMode::ABSOLUTE ? "absolute" : "relative";
}

// One axis per dataset. RELATIVE stores per-axis min-max mapped values in
// [0, 1] with 1 = best; ABSOLUTE stores the raw values and renders them
// against the shared range [0, global max].
struct RadarSpec {
  std::vector<std::string> axes;
  std::vector<std::string> models;
  std::vector<std::vector<double>> per_model; // [model index][axis index]
  RadarMode mode = RadarMode::ABSOLUTE;
  bool lower_is_better = true;
};

namespace detail {

inline void require_complete(const AggregatedTable &table, const char *op) {
  if (table.models.empty() || table.datasets.empty() ||
      table.values.size() != table.models.size())
    throw ValidationError(ValidationKind::IncompleteTable,
                          std::string(op) + ": table shape is inconsistent");
  for (const auto &row : table.values) {
    if (row.size() != table.datasets.size())
      throw ValidationError(ValidationKind::IncompleteTable,
                            std::string(op) + ": ragged value rows");
    for (double v : row)
      if (!std::isfinite(v))
        throw ValidationError(ValidationKind::IncompleteTable,
                              std::string(op) + ": non-finite cell");
  }
}

inline std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

} // namespace detail

inline RadarSpec build_radar(const AggregatedTable &table, RadarMode mode) {
  detail::require_complete(table, "build_radar");
  RadarSpec spec;
  spec.axes = table.datasets;
  spec.models = table.models;
  spec.mode = mode;
  spec.per_model = table.values;
  if (mode == RadarMode::ABSOLUTE) return spec;
  for (std::size_t a = 0; a < spec.axes.size(); ++a) {
    double best = table.values[0][a], worst = table.values[0][a];
    for (const auto &row : table.values) {
      best = std::min(best, row[a]);
      worst = std::max(worst, row[a]);
    }
    for (auto &row : spec.per_model)
      row[a] = worst == best ? 1.0 : (worst - row[a]) / (worst - best);
  }
  return spec;
}

// Standalone SVG 1.1, one polygon per model, byte-deterministic: fixed
// element order, all floats printed to 4 decimals.
inline void emit_svg(const RadarSpec &spec, const std::string &path) {
  if (spec.axes.size() < 3)
    throw ValidationError(ValidationKind::TooFewAxes,
                          "radar needs at least 3 axes, got " +
                              std::to_string(spec.axes.size()));
  for (const auto &row : spec.per_model)
    if (row.size() != spec.axes.size())
      throw ValidationError(ValidationKind::IncompleteTable,
                            "emit_svg: ragged axis values");

  static const char *const palette[] = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr std::size_t palette_n = sizeof palette / sizeof palette[0];
  const double cx = 320.0, cy = 300.0, radius = 220.0;
  const double pi = std::acos(-1.0);
  const std::size_t n = spec.axes.size();

  double global_max = 0.0;
  for (const auto &row : spec.per_model)
    for (double v : row) global_max = std::max(global_max, v);
  const double scale = spec.mode == RadarMode::RELATIVE
                           ? 1.0
                           : (global_max > 0.0 ? global_max : 1.0);

  auto point = [&](std::size_t axis, double r) {
    const double angle =
        -pi / 2.0 + 2.0 * pi * static_cast<double>(axis) / static_cast<double>(n);
    return std::make_pair(cx + radius * r * std::cos(angle),
                          cy + radius * r * std::sin(angle));
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
         "viewBox=\"0 0 640 " +
         std::to_string(640 + 20 * ((spec.models.size() + 3) / 4)) + "\">\n";
  svg += "<title>" + std::string(to_string(spec.mode)) + " scale</title>\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  for (int ring = 1; ring <= 4; ++ring) {
    svg += "<polygon class=\"grid\" points=\"";
    for (std::size_t a = 0; a < n; ++a) {
      const auto [x, y] = point(a, 0.25 * ring);
      svg += detail::fmt4(x) + "," + detail::fmt4(y);
      if (a + 1 < n) svg += " ";
    }
    svg += "\" fill=\"none\" stroke=\"#d0d0d0\" stroke-width=\"1\"/>\n";
  }
  for (std::size_t a = 0; a < n; ++a) {
    const auto [x, y] = point(a, 1.0);
    svg += "<line x1=\"" + detail::fmt4(cx) + "\" y1=\"" + detail::fmt4(cy) +
           "\" x2=\"" + detail::fmt4(x) + "\" y2=\"" + detail::fmt4(y) +
           "\" stroke=\"#b0b0b0\" stroke-width=\"1\"/>\n";
    const auto [lx, ly] = point(a, 1.12);
    svg += "<text x=\"" + detail::fmt4(lx) + "\" y=\"" + detail::fmt4(ly) +
           "\" font-size=\"13\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\">" +
           spec.axes[a] + "</text>\n";
  }

  for (std::size_t mi = 0; mi < spec.models.size(); ++mi) {
    const char *color = palette[mi % palette_n];
    svg += "<polygon class=\"model\" points=\"";
    for (std::size_t a = 0; a < n; ++a) {
      const auto [x, y] = point(a, spec.per_model[mi][a] / scale);
      svg += detail::fmt4(x) + "," + detail::fmt4(y);
      if (a + 1 < n) svg += " ";
    }
    svg += std::string("\" fill=\"") + color + "\" fill-opacity=\"0.06\" " +
           "stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
  }

  for (std::size_t mi = 0; mi < spec.models.size(); ++mi) {
    const double lx = 24.0 + 156.0 * static_cast<double>(mi % 4);
    const double ly = 624.0 + 20.0 * static_cast<double>(mi / 4);
    const char *color = palette[mi % palette_n];
    svg += std::string("<rect x=\"") + detail::fmt4(lx) + "\" y=\"" +
           detail::fmt4(ly - 10.0) + "\" width=\"12\" height=\"12\" fill=\"" +
           color + "\"/>\n";
    svg += "<text x=\"" + detail::fmt4(lx + 18.0) + "\" y=\"" +
           detail::fmt4(ly) +
           "\" font-size=\"13\" font-family=\"sans-serif\">" + spec.models[mi] +
           "</text>\n";
  }
  svg += "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ValidationError(ValidationKind::IoFailure,
                          "cannot open '" + path + "' for writing");
  out << svg;
  if (!out)
    throw ValidationError(ValidationKind::IoFailure,
                          "short write to '" + path + "'");
}

enum class TableFormat { MARKDOWN, DELIMITED };

namespace detail {

// Best and runner-up values per dataset row; a tie for best leaves no
// runner-up, mirroring the table-highlighting convention.
struct RowTags {
  double best;
  bool has_second = false;
  double second = 0.0;
};

inline RowTags row_tags(const AggregatedTable &table, std::size_t axis) {
  RowTags tags{table.values[0][axis]};
  for (const auto &row : table.values)
    tags.best = std::min(tags.best, row[axis]);
  std::size_t best_count = 0;
  for (const auto &row : table.values)
    if (row[axis] == tags.best) ++best_count;
  if (best_count > 1) return tags;
  double second = std::numeric_limits<double>::infinity();
  for (const auto &row : table.values)
    if (row[axis] > tags.best) second = std::min(second, row[axis]);
  if (std::isfinite(second)) {
    tags.has_second = true;
    tags.second = second;
  }
  return tags;
}

} // namespace detail

// One row per dataset, one column per model. Markdown wraps the best value
// in ** and the runner-up in *; delimited output appends best / second name
// columns instead (ties joined with ';').
inline std::string render_table(const AggregatedTable &table,
                                TableFormat format) {
  detail::require_complete(table, "render_table");
  std::string out;
  if (format == TableFormat::MARKDOWN) {
    out += "| Dataset |";
    for (const auto &m : table.models) out += " " + m + " |";
    out += "\n|";
    for (std::size_t i = 0; i <= table.models.size(); ++i) out += " --- |";
    out += "\n";
    for (std::size_t a = 0; a < table.datasets.size(); ++a) {
      const auto tags = detail::row_tags(table, a);
      out += "| " + table.datasets[a] + " |";
      for (std::size_t mi = 0; mi < table.models.size(); ++mi) {
        const double v = table.values[mi][a];
        std::string cell = detail::fmt4(v);
        if (v == tags.best)
          cell = "**" + cell + "**";
        else if (tags.has_second && v == tags.second)
          cell = "*" + cell + "*";
        out += " " + cell + " |";
      }
      out += "\n";
    }
    return out;
  }

  out += "dataset";
  for (const auto &m : table.models) out += "," + m;
  out += ",best,second\n";
  for (std::size_t a = 0; a < table.datasets.size(); ++a) {
    const auto tags = detail::row_tags(table, a);
    out += table.datasets[a];
    for (std::size_t mi = 0; mi < table.models.size(); ++mi)
      out += "," + detail::fmt_value(table.values[mi][a]);
    std::string best_names, second_names;
    for (std::size_t mi = 0; mi < table.models.size(); ++mi) {
      const double v = table.values[mi][a];
      if (v == tags.best) {
        if (!best_names.empty()) best_names += ";";
        best_names += table.models[mi];
      } else if (tags.has_second && v == tags.second) {
        if (!second_names.empty()) second_names += ";";
        second_names += table.models[mi];
      }
    }
    out += "," + best_names + "," + second_names + "\n";
  }
  return out;
}

} // namespace benchaudit
