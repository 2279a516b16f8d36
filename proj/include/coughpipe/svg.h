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

#ifndef COUGHPIPE_SVG_H_
#define COUGHPIPE_SVG_H_

#include <string>
#include <utility>
#include <vector>

namespace coughpipe::svg {

// One named polyline of (x, y) points.
struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Writes a line chart with axes, ticks and a legend.
//
// Throws IoFailure.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

// Writes grouped vertical bars; `groups` label the clusters along x and
// each series contributes one bar per group.
struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per group
};
void write_bar_chart(const std::string& path, const std::string& title,
                     const std::vector<std::string>& groups,
                     const std::vector<BarSeries>& series);

// Writes a colour-mapped matrix with per-cell value labels when small.
void write_heatmap(const std::string& path, const std::string& title,
                   const std::vector<std::vector<double>>& cells,
                   const std::vector<std::string>& row_labels = {},
                   const std::vector<std::string>& col_labels = {});

}  // namespace coughpipe::svg

#endif  // COUGHPIPE_SVG_H_
