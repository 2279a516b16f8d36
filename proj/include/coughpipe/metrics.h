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

#ifndef COUGHPIPE_METRICS_H_
#define COUGHPIPE_METRICS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace coughpipe {

struct ConfusionMatrix {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;
  uint64_t tn = 0;

  uint64_t total() const { return tp + fp + fn + tn; }
};

// Thresholds probabilities at `threshold` (score >= threshold counts as
// positive) and tallies against the 0/1 labels.
//
// Throws LengthMismatch, PreconditionError (empty input, labels outside
// {0,1}, probabilities outside [0,1]).
ConfusionMatrix confusion(const std::vector<double>& probs,
                          const std::vector<int>& labels,
                          double threshold = 0.5);

struct MetricsSummary {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Derives accuracy, precision, recall and F1 from counts. Any metric
// whose denominator is zero is reported as 0.
MetricsSummary summarize(const ConfusionMatrix& cm);

// Harmonic mean of precision and recall; 0 when both are 0.
double f1_from(double precision, double recall);

// Serialization helpers used by the pipeline outputs. The JSON text is
// deterministic: keys are emitted in sorted order with shortest
// round-trip number formatting.
std::string metrics_to_json(const ConfusionMatrix& cm,
                            const MetricsSummary& s);
void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path);

// 2x2 count heatmap.
void write_confusion_svg(const ConfusionMatrix& cm, const std::string& path);

}  // namespace coughpipe

#endif  // COUGHPIPE_METRICS_H_
