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

#include "coughpipe/metrics.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "coughpipe/errors.h"
#include "coughpipe/svg.h"

namespace coughpipe {

ConfusionMatrix confusion(const std::vector<double>& probs,
                          const std::vector<int>& labels, double threshold) {
  if (probs.size() != labels.size()) {
    throw LengthMismatch("confusion: " + std::to_string(probs.size()) +
                         " probabilities vs " + std::to_string(labels.size()) +
                         " labels");
  }
  if (probs.empty()) throw PreconditionError("confusion: empty input");
  ConfusionMatrix cm;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw PreconditionError("confusion: label must be 0 or 1");
    }
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      throw PreconditionError("confusion: probability outside [0, 1]");
    }
    const bool predicted = probs[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) {
      ++cm.tp;
    } else if (predicted && !actual) {
      ++cm.fp;
    } else if (!predicted && actual) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

MetricsSummary summarize(const ConfusionMatrix& cm) {
  MetricsSummary s;
  const double total = static_cast<double>(cm.total());
  s.accuracy = total > 0.0 ? static_cast<double>(cm.tp + cm.tn) / total : 0.0;
  const double pred_pos = static_cast<double>(cm.tp + cm.fp);
  s.precision = pred_pos > 0.0 ? static_cast<double>(cm.tp) / pred_pos : 0.0;
  const double actual_pos = static_cast<double>(cm.tp + cm.fn);
  s.recall = actual_pos > 0.0 ? static_cast<double>(cm.tp) / actual_pos : 0.0;
  s.f1 = f1_from(s.precision, s.recall);
  return s;
}

double f1_from(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

std::string metrics_to_json(const ConfusionMatrix& cm,
                            const MetricsSummary& s) {
  nlohmann::json j;
  j["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
  j["accuracy"] = s.accuracy;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  return j.dump(2);
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open for writing: " + path);
  f << "actual,predicted_positive,predicted_negative\n";
  f << "positive," << cm.tp << ',' << cm.fn << "\n";
  f << "negative," << cm.fp << ',' << cm.tn << "\n";
  if (!f.good()) throw IoFailure("write failed: " + path);
}

void write_confusion_svg(const ConfusionMatrix& cm, const std::string& path) {
  const std::vector<std::vector<double>> cells = {
      {static_cast<double>(cm.tp), static_cast<double>(cm.fn)},
      {static_cast<double>(cm.fp), static_cast<double>(cm.tn)}};
  svg::write_heatmap(path, "Confusion matrix", cells,
                     {"actual +", "actual -"},
                     {"predicted +", "predicted -"});
}

}  // namespace coughpipe
