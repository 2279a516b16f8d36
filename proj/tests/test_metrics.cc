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

#include <cmath>
#include <string>
#include <vector>

#include "coughpipe/errors.h"
#include "doctest.h"

using namespace coughpipe;

TEST_CASE("confusion tallies the four cells") {
  const std::vector<double> probs = {0.9, 0.8, 0.3, 0.2, 0.6, 0.4};
  const std::vector<int> labels = {1, 0, 1, 0, 1, 0};
  const ConfusionMatrix cm = confusion(probs, labels);
  CHECK(cm.tp == 2);  // 0.9, 0.6
  CHECK(cm.fp == 1);  // 0.8
  CHECK(cm.fn == 1);  // 0.3
  CHECK(cm.tn == 2);  // 0.2, 0.4
  CHECK(cm.total() == 6);
}

TEST_CASE("threshold boundary counts as positive") {
  const ConfusionMatrix cm = confusion({0.5}, {1});
  CHECK(cm.tp == 1);
  const ConfusionMatrix cm2 = confusion({0.5}, {0});
  CHECK(cm2.fp == 1);
  // Just below goes negative.
  const ConfusionMatrix cm3 = confusion({0.4999999}, {1});
  CHECK(cm3.fn == 1);
}

TEST_CASE("custom threshold moves the boundary") {
  const std::vector<double> probs = {0.55, 0.65};
  const std::vector<int> labels = {1, 1};
  const ConfusionMatrix strict = confusion(probs, labels, 0.6);
  CHECK(strict.tp == 1);
  CHECK(strict.fn == 1);
}

TEST_CASE("summary derives the four headline numbers") {
  // Worked example: 9583 true positives, 288 false positives, 417 false
  // negatives, 3500 true negatives.
  ConfusionMatrix cm;
  cm.tp = 9583;
  cm.fp = 288;
  cm.fn = 417;
  cm.tn = 3500;
  const MetricsSummary s = summarize(cm);
  const double precision = 9583.0 / (9583.0 + 288.0);
  const double recall = 9583.0 / (9583.0 + 417.0);
  const double f1 = 2.0 * precision * recall / (precision + recall);
  CHECK(s.accuracy ==
        doctest::Approx((9583.0 + 3500.0) / 13788.0).epsilon(1e-12));
  CHECK(s.precision == doctest::Approx(precision).epsilon(1e-12));
  CHECK(s.recall == doctest::Approx(recall).epsilon(1e-12));
  CHECK(s.f1 == doctest::Approx(f1).epsilon(1e-12));
  // Cross-check the known headline value of this table.
  CHECK(std::abs(s.f1 - 0.9645) < 5e-4);
  CHECK(std::abs(s.recall - 0.9583) < 5e-4);
  CHECK(std::abs(s.precision - 0.9708) < 5e-4);
}

TEST_CASE("zero denominators report zero instead of dividing") {
  ConfusionMatrix none;  // everything zero
  const MetricsSummary s0 = summarize(none);
  CHECK(s0.accuracy == 0.0);
  CHECK(s0.precision == 0.0);
  CHECK(s0.recall == 0.0);
  CHECK(s0.f1 == 0.0);

  ConfusionMatrix all_negative;
  all_negative.tn = 10;
  const MetricsSummary s1 = summarize(all_negative);
  CHECK(s1.accuracy == 1.0);
  CHECK(s1.precision == 0.0);  // no positive predictions
  CHECK(s1.recall == 0.0);     // no positive labels
  CHECK(s1.f1 == 0.0);

  ConfusionMatrix never_predicted;
  never_predicted.fn = 5;
  never_predicted.tn = 5;
  const MetricsSummary s2 = summarize(never_predicted);
  CHECK(s2.precision == 0.0);
  CHECK(s2.recall == 0.0);
  CHECK(s2.f1 == 0.0);
}

TEST_CASE("f1 is the harmonic mean with a zero guard") {
  CHECK(f1_from(0.0, 0.0) == 0.0);
  CHECK(f1_from(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(f1_from(0.5, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(f1_from(0.9708131896, 0.9583) ==
        doctest::Approx(0.9645161760).epsilon(1e-6));
}

TEST_CASE("perfect and inverted classifiers bound the range") {
  const std::vector<int> labels = {1, 1, 0, 0};
  const MetricsSummary perfect =
      summarize(confusion({0.9, 0.8, 0.1, 0.2}, labels));
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.f1 == 1.0);
  const MetricsSummary inverted =
      summarize(confusion({0.1, 0.2, 0.9, 0.8}, labels));
  CHECK(inverted.accuracy == 0.0);
  CHECK(inverted.f1 == 0.0);
}

TEST_CASE("confusion validates its inputs") {
  CHECK_THROWS_AS(confusion({}, {}), PreconditionError);
  CHECK_THROWS_AS(confusion({0.5, 0.5}, {1}), LengthMismatch);
  CHECK_THROWS_AS(confusion({0.5}, {2}), PreconditionError);
  CHECK_THROWS_AS(confusion({1.5}, {1}), PreconditionError);
  CHECK_THROWS_AS(confusion({-0.1}, {0}), PreconditionError);
}

TEST_CASE("json rendering carries all fields deterministically") {
  ConfusionMatrix cm;
  cm.tp = 1;
  cm.fp = 2;
  cm.fn = 3;
  cm.tn = 4;
  const MetricsSummary s = summarize(cm);
  const std::string a = metrics_to_json(cm, s);
  const std::string b = metrics_to_json(cm, s);
  CHECK(a == b);
  CHECK(a.find("\"tp\"") != std::string::npos);
  CHECK(a.find("\"accuracy\"") != std::string::npos);
  CHECK(a.find("\"f1\"") != std::string::npos);
}
