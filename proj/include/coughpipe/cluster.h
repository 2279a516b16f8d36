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

#ifndef COUGHPIPE_CLUSTER_H_
#define COUGHPIPE_CLUSTER_H_

#include <cstdint>
#include <vector>

#include "coughpipe/rng.h"

namespace coughpipe {

struct KMeansConfig {
  int k = 2;
  int n_restarts = 10;
  int max_iter = 300;   // update steps per restart
  double tol = 1e-6;    // stop once the largest centroid shift is <= tol
};

struct KMeansResult {
  std::vector<std::vector<double>> centroids;  // k rows
  std::vector<int> assignment;                 // nearest centroid per point
  double wcss = 0.0;  // within-cluster sum of squared distances
  // WCSS after every assignment phase of the winning restart;
  // non-increasing by construction.
  std::vector<double> wcss_trace;
  int iterations = 0;  // update steps the winning restart ran
  int restart = 0;     // which restart won
};

// Seeds k centroids by squared-distance-weighted sampling: the first is
// uniform, each later one is drawn with probability proportional to the
// squared distance to the nearest centroid so far (uniform fallback when
// every point already coincides with a centroid).
std::vector<std::vector<double>> kmeans_pp_init(
    const std::vector<std::vector<double>>& points, int k, Rng& rng);

// Lloyd iterations from a squared-distance-weighted seeding, repeated for
// n_restarts independent runs; returns the run with the lowest WCSS (ties
// keep the earliest). Distance ties assign to the lowest centroid index;
// a cluster that loses all its points is reseeded at the point farthest
// from its current centroid. Restart r derives its stream from (seed, r).
//
// Throws EmptyMatrix, DimensionMismatch (ragged rows), PreconditionError
// (k < 1 or bad config), TooFewPoints (fewer points than k).
KMeansResult kmeans(const std::vector<std::vector<double>>& points,
                    const KMeansConfig& cfg, uint64_t seed);

struct ElbowPoint {
  int k = 0;
  double wcss = 0.0;
};

// Final WCSS for each k in [k_min, k_max] (k_max is clamped to the number
// of points). Run k uses the stream (seed, k).
std::vector<ElbowPoint> elbow_curve(const std::vector<std::vector<double>>& points,
                                    int k_min, int k_max,
                                    const KMeansConfig& base, uint64_t seed);

// Mean silhouette over all points with Euclidean distances. A singleton
// cluster's point scores 0, as does a point with a == b == 0.
//
// Throws LengthMismatch, EmptyMatrix, PreconditionError (negative label),
// SingleCluster (fewer than two distinct clusters).
double silhouette_mean(const std::vector<std::vector<double>>& points,
                       const std::vector<int>& assignment);

struct SilhouettePoint {
  int k = 0;
  double silhouette = 0.0;
};

struct KSelection {
  int k = 0;             // argmax of the mean silhouette; ties -> smaller k
  double silhouette = 0.0;
  std::vector<SilhouettePoint> per_k;
};

// Clusters for each k in [k_min, k_max] and picks the k with the highest
// mean silhouette. k_min must be >= 2.
KSelection select_k(const std::vector<std::vector<double>>& points, int k_min,
                    int k_max, const KMeansConfig& base, uint64_t seed);

}  // namespace coughpipe

#endif  // COUGHPIPE_CLUSTER_H_
