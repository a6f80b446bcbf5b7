#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gsom/csv.hpp"
#include "gsom/error.hpp"
#include "gsom/topology.hpp"

namespace gsom {

namespace svg {

inline std::string num(double v) { return format_fixed(v, 2); }

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

/// Accumulates SVG elements; emits a well-formed document with declared
/// width/height and no timestamps, so outputs diff cleanly.
class Builder {
 public:
  Builder(double width, double height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "") {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"";
    if (!stroke.empty()) body_ += " stroke=\"" + stroke + "\"";
    body_ += "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
             num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width = 1.0, double opacity = 1.0) {
    if (pts.size() < 2) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) +
             "\" stroke-opacity=\"" + num(opacity) + "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) body_ += " ";
      body_ += num(pts[i].first) + "," + num(pts[i].second);
    }
    body_ += "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "start", const std::string& fill = "#000000") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill +
             "\">" + escape(s) + "</text>\n";
  }

  std::string finish() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
           num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
           "\" fill=\"#ffffff\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

 private:
  double width_, height_;
  std::string body_;
};

inline std::string gray(double t) {
  const int level = static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
  const char digits[] = "0123456789abcdef";
  std::string hex;
  hex += digits[(level >> 4) & 15];
  hex += digits[level & 15];
  return "#" + hex + hex + hex;
}

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
      "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
  return colors;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::string color;     // empty: palette by index
  double width = 1.5;
  double opacity = 1.0;
};

/// Line chart with axes, ticks, and an optional legend.
inline std::string line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<Series>& series,
                              bool legend = true, double width = 640, double height = 420) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  require(x_min <= x_max, "line_chart: no points");
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;
  const double pad_y = 0.05 * (y_max - y_min);
  y_min -= pad_y;
  y_max += pad_y;

  const double left = 64, right = width - 16, top = 40, bottom = height - 48;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
  auto py = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

  Builder b(width, height);
  b.text(width / 2, 22, title, 14, "middle");
  b.line(left, bottom, right, bottom, "#000000");
  b.line(left, bottom, left, top, "#000000");
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = x_min + (x_max - x_min) * t / ticks;
    const double fy = y_min + (y_max - y_min) * t / ticks;
    b.line(px(fx), bottom, px(fx), bottom + 4, "#000000");
    b.text(px(fx), bottom + 18, format_sig(fx, 3), 10, "middle");
    b.line(left - 4, py(fy), left, py(fy), "#000000");
    b.text(left - 6, py(fy) + 3, format_sig(fy, 3), 10, "end");
  }
  b.text((left + right) / 2, height - 12, x_label, 12, "middle");
  b.text(18, (top + bottom) / 2, y_label, 12, "middle");

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = s.color.empty() ? palette()[i % palette().size()] : s.color;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(s.points.size());
    for (auto [x, y] : s.points) pts.emplace_back(px(x), py(y));
    b.polyline(pts, color, s.width, s.opacity);
  }
  if (legend) {
    double ly = top + 4;
    for (std::size_t i = 0; i < series.size() && i < 12; ++i) {
      if (series[i].label.empty()) continue;
      const std::string color = series[i].color.empty() ? palette()[i % palette().size()] : series[i].color;
      b.line(right - 110, ly, right - 90, ly, color, 2.0);
      b.text(right - 84, ly + 4, series[i].label, 10);
      ly += 14;
    }
  }
  return b.finish();
}

/// A cell of a unit-layout heatmap; absent cells leave gaps.
using CellGrid = std::vector<std::vector<std::optional<double>>>;

/// Grayscale heatmap, black for the lowest value and white for the highest.
/// A constant grid renders mid-gray with a note in the legend.
inline std::string heatmap(const std::string& title, const CellGrid& cells,
                           const std::vector<std::string>& row_labels = {},
                           bool show_values = false) {
  require(!cells.empty(), "heatmap: no cells");
  std::size_t n_cols = 0;
  double v_min = std::numeric_limits<double>::infinity(), v_max = -v_min;
  for (const auto& row : cells) {
    n_cols = std::max(n_cols, row.size());
    for (const auto& c : row)
      if (c) {
        v_min = std::min(v_min, *c);
        v_max = std::max(v_max, *c);
      }
  }
  require(n_cols > 0 && v_min <= v_max, "heatmap: no values");
  const bool constant = v_min == v_max;

  const double cell = 34, left = 70, top = 44;
  const double width = left + cell * static_cast<double>(n_cols) + 20;
  const double height = top + cell * static_cast<double>(cells.size()) + 40;
  Builder b(width, height);
  b.text(width / 2, 22, title, 14, "middle");
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (r < row_labels.size())
      b.text(left - 8, top + cell * (static_cast<double>(r) + 0.5) + 4, row_labels[r], 10, "end");
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (!cells[r][c]) continue;
      const double t = constant ? 0.5 : (*cells[r][c] - v_min) / (v_max - v_min);
      b.rect(left + cell * static_cast<double>(c), top + cell * static_cast<double>(r), cell, cell,
             gray(t), "#404040");
      if (show_values) {
        const std::string color = t < 0.5 ? "#ffffff" : "#000000";
        b.text(left + cell * (static_cast<double>(c) + 0.5),
               top + cell * (static_cast<double>(r) + 0.5) + 3, format_sig(*cells[r][c], 3), 8,
               "middle", color);
      }
    }
  }
  const double ly = top + cell * static_cast<double>(cells.size()) + 20;
  if (constant) {
    b.text(left, ly, "constant value " + format_sig(v_min) + " (uniform scale)", 10);
  } else {
    b.text(left, ly, "black = " + format_sig(v_min) + "  white = " + format_sig(v_max), 10);
  }
  return b.finish();
}

}  // namespace svg

/// Unit layout for component-plane heatmaps: grid as its own shape, strings
/// one row per string, star one row per ray plus a leading center row,
/// custom graphs one row per component.
inline std::vector<std::vector<int>> unit_layout(const MapTopology& topo) {
  std::vector<std::vector<int>> rows;
  const auto [a, b] = topo.lattice_params();
  switch (topo.kind()) {
    case LatticeKind::Grid:
      for (int r = 0; r < a; ++r) {
        std::vector<int> row;
        for (int c = 1; c <= b; ++c) row.push_back(r * b + c);
        rows.push_back(std::move(row));
      }
      break;
    case LatticeKind::Strings:
      for (int s = 0; s < a; ++s) {
        std::vector<int> row;
        for (int p = 1; p <= b; ++p) row.push_back(s * b + p);
        rows.push_back(std::move(row));
      }
      break;
    case LatticeKind::Star: {
      rows.push_back({1});
      for (int r = 0; r < a; ++r) {
        std::vector<int> row;
        for (int p = 0; p < b; ++p) row.push_back(2 + r * b + p);
        rows.push_back(std::move(row));
      }
      break;
    }
    case LatticeKind::Custom:
      for (int c = 1; c <= topo.component_count(); ++c) rows.push_back(topo.component_members(c));
      break;
  }
  return rows;
}

}  // namespace gsom
