// Copyright 2026 The Coughpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coughpipe/svg.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "coughpipe/errors.h"

namespace coughpipe::svg {
namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 150;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void save(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open for writing: " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
    << kHeight << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << body << "</svg>\n";
  if (!f.good()) throw IoFailure("write failed: " + path);
}

std::string text(double x, double y, const std::string& s, int size,
                 const std::string& anchor = "middle",
                 const std::string& extra = "") {
  std::ostringstream os;
  os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\""
     << size << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor
     << "\" " << extra << ">" << s << "</text>\n";
  return os.str();
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  double span() const { return hi > lo ? hi - lo : 1.0; }
};

Range nice_range(double lo, double hi) {
  if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  const Range xr = nice_range(xmin, xmax);
  const Range yr = nice_range(ymin, ymax);
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto px = [&](double x) {
    return kMarginLeft + (x - xr.lo) / xr.span() * plot_w;
  };
  const auto py = [&](double y) {
    return kMarginTop + plot_h - (y - yr.lo) / yr.span() * plot_h;
  };

  std::ostringstream body;
  body << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop
       << "\" width=\"" << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
  body << text(kWidth / 2.0, 28, title, 16);
  body << text(kMarginLeft + plot_w / 2.0, kHeight - 14, x_label, 12);
  body << text(18, kMarginTop + plot_h / 2.0, y_label, 12, "middle",
               "transform=\"rotate(-90 18 " +
                   fmt(kMarginTop + plot_h / 2.0) + ")\"");
  for (int t = 0; t <= 5; ++t) {
    const double fx = xr.lo + xr.span() * t / 5.0;
    const double fy = yr.lo + yr.span() * t / 5.0;
    body << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << kMarginTop
         << "\" x2=\"" << fmt(px(fx)) << "\" y2=\""
         << fmt(kMarginTop + plot_h) << "\" stroke=\"#ddd\"/>\n";
    body << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(py(fy))
         << "\" x2=\"" << fmt(kMarginLeft + plot_w) << "\" y2=\""
         << fmt(py(fy)) << "\" stroke=\"#ddd\"/>\n";
    body << text(px(fx), kMarginTop + plot_h + 18, fmt(fx), 10);
    body << text(kMarginLeft - 8, py(fy) + 4, fmt(fy), 10, "end");
  }
  for (size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % 6];
    std::ostringstream pts;
    for (const auto& [x, y] : series[s].points) {
      pts << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    }
    body << "<polyline fill=\"none\" stroke=\"" << colour
         << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    for (const auto& [x, y] : series[s].points) {
      body << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
           << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    const double ly = kMarginTop + 16.0 * static_cast<double>(s);
    body << "<rect x=\"" << kWidth - kMarginRight + 12 << "\" y=\""
         << fmt(ly) << "\" width=\"12\" height=\"12\" fill=\"" << colour
         << "\"/>\n";
    body << text(kWidth - kMarginRight + 30, ly + 10, series[s].name, 11,
                 "start");
  }
  save(path, body.str());
}

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::vector<std::string>& groups,
                     const std::vector<BarSeries>& series) {
  double ymax = 0.0;
  for (const auto& s : series) {
    for (double v : s.values) ymax = std::max(ymax, v);
  }
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.05;
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const size_t n_groups = groups.size();
  const size_t n_series = std::max<size_t>(series.size(), 1);
  const double group_w = plot_w / std::max<size_t>(n_groups, 1);
  const double bar_w = group_w * 0.8 / static_cast<double>(n_series);

  std::ostringstream body;
  body << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop
       << "\" width=\"" << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
  body << text(kWidth / 2.0, 28, title, 16);
  for (int t = 0; t <= 5; ++t) {
    const double fy = ymax * t / 5.0;
    const double y = kMarginTop + plot_h - fy / ymax * plot_h;
    body << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(y)
         << "\" x2=\"" << fmt(kMarginLeft + plot_w) << "\" y2=\"" << fmt(y)
         << "\" stroke=\"#ddd\"/>\n";
    body << text(kMarginLeft - 8, y + 4, fmt(fy), 10, "end");
  }
  for (size_t g = 0; g < n_groups; ++g) {
    const double gx = kMarginLeft + group_w * (static_cast<double>(g) + 0.1);
    for (size_t s = 0; s < series.size(); ++s) {
      if (g >= series[s].values.size()) continue;
      const double v = series[s].values[g];
      const double h = v / ymax * plot_h;
      body << "<rect x=\"" << fmt(gx + bar_w * static_cast<double>(s))
           << "\" y=\"" << fmt(kMarginTop + plot_h - h) << "\" width=\""
           << fmt(bar_w * 0.9) << "\" height=\"" << fmt(h) << "\" fill=\""
           << kPalette[s % 6] << "\"/>\n";
    }
    body << text(kMarginLeft + group_w * (static_cast<double>(g) + 0.5),
                 kMarginTop + plot_h + 18, groups[g], 11);
  }
  for (size_t s = 0; s < series.size(); ++s) {
    const double ly = kMarginTop + 16.0 * static_cast<double>(s);
    body << "<rect x=\"" << kWidth - kMarginRight + 12 << "\" y=\""
         << fmt(ly) << "\" width=\"12\" height=\"12\" fill=\""
         << kPalette[s % 6] << "\"/>\n";
    body << text(kWidth - kMarginRight + 30, ly + 10, series[s].name, 11,
                 "start");
  }
  save(path, body.str());
}

void write_heatmap(const std::string& path, const std::string& title,
                   const std::vector<std::vector<double>>& cells,
                   const std::vector<std::string>& row_labels,
                   const std::vector<std::string>& col_labels) {
  if (cells.empty() || cells.front().empty()) {
    throw PreconditionError("write_heatmap: empty matrix");
  }
  const size_t rows = cells.size();
  const size_t cols = cells.front().size();
  double lo = cells[0][0], hi = cells[0][0];
  for (const auto& row : cells) {
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const double plot_w = kWidth - kMarginLeft - 40;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const double cw = plot_w / static_cast<double>(cols);
  const double ch = plot_h / static_cast<double>(rows);

  std::ostringstream body;
  body << text(kWidth / 2.0, 28, title, 16);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      const double t = (cells[r][c] - lo) / (hi - lo);
      const int red = static_cast<int>(255 * t);
      const int blue = static_cast<int>(255 * (1.0 - t));
      const double x = kMarginLeft + cw * static_cast<double>(c);
      const double y = kMarginTop + ch * static_cast<double>(r);
      body << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
           << fmt(cw) << "\" height=\"" << fmt(ch) << "\" fill=\"rgb(" << red
           << ",80," << blue << ")\"/>\n";
      if (rows * cols <= 64) {
        body << text(x + cw / 2.0, y + ch / 2.0 + 4, fmt(cells[r][c]), 12,
                     "middle", "fill=\"white\"");
      }
    }
    if (r < row_labels.size()) {
      body << text(kMarginLeft - 8, kMarginTop + ch * (r + 0.5) + 4,
                   row_labels[r], 11, "end");
    }
  }
  for (size_t c = 0; c < col_labels.size() && c < cols; ++c) {
    body << text(kMarginLeft + cw * (c + 0.5), kMarginTop + plot_h + 18,
                 col_labels[c], 11);
  }
  save(path, body.str());
}

}  // namespace coughpipe::svg
