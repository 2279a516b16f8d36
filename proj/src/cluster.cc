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

#include "coughpipe/cluster.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "coughpipe/errors.h"

namespace coughpipe {
namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void check_points(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw EmptyMatrix("no points to cluster");
  const size_t d = points.front().size();
  if (d == 0) throw EmptyMatrix("points have zero dimensions");
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw DimensionMismatch("point " + std::to_string(i) + " has " +
                              std::to_string(points[i].size()) +
                              " dimensions, expected " + std::to_string(d));
    }
  }
}

// One Lloyd run from a fresh seeding. Returns centroids/assignment/wcss
// that are mutually consistent (a final assignment pass follows the last
// update).
KMeansResult run_once(const std::vector<std::vector<double>>& points,
                      const KMeansConfig& cfg, Rng& rng) {
  const size_t n = points.size();
  const size_t k = static_cast<size_t>(cfg.k);

  KMeansResult res;
  res.centroids = kmeans_pp_init(points, cfg.k, rng);
  res.assignment.assign(n, 0);

  std::vector<double> point_dist(n, 0.0);  // sq dist to assigned centroid
  const auto assign_phase = [&]() {
    double wcss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], res.centroids[0]);
      for (size_t c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], res.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      res.assignment[i] = best;
      point_dist[i] = best_d;
      wcss += best_d;
    }
    return wcss;
  };

  const size_t dim = points.front().size();
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    res.wcss_trace.push_back(assign_phase());

    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      const auto c = static_cast<size_t>(res.assignment[i]);
      counts[c] += 1;
      for (size_t j = 0; j < dim; ++j) next[c][j] += points[i][j];
    }
    std::vector<char> taken(n, 0);
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (size_t j = 0; j < dim; ++j) {
          next[c][j] /= static_cast<double>(counts[c]);
        }
        continue;
      }
      // Reseed an emptied cluster at the point farthest from its
      // current centroid (each point used at most once per update).
      size_t far = 0;
      double far_d = -1.0;
      for (size_t i = 0; i < n; ++i) {
        if (!taken[i] && point_dist[i] > far_d) {
          far_d = point_dist[i];
          far = i;
        }
      }
      taken[far] = 1;
      next[c] = points[far];
    }

    double max_shift_sq = 0.0;
    for (size_t c = 0; c < k; ++c) {
      max_shift_sq = std::max(max_shift_sq, sq_dist(res.centroids[c], next[c]));
    }
    res.centroids = std::move(next);
    res.iterations = iter + 1;
    if (std::sqrt(max_shift_sq) <= cfg.tol) break;
  }

  res.wcss = assign_phase();
  res.wcss_trace.push_back(res.wcss);
  return res;
}

}  // namespace

std::vector<std::vector<double>> kmeans_pp_init(
    const std::vector<std::vector<double>>& points, int k, Rng& rng) {
  check_points(points);
  if (k < 1) throw PreconditionError("k must be >= 1");
  const size_t n = points.size();
  if (n < static_cast<size_t>(k)) {
    throw TooFewPoints("cannot place " + std::to_string(k) +
                       " centroids on " + std::to_string(n) + " points");
  }

  std::vector<std::vector<double>> centroids;
  centroids.reserve(static_cast<size_t>(k));
  centroids.push_back(points[rng.uniform_index(n)]);

  std::vector<double> d2(n, 0.0);
  while (centroids.size() < static_cast<size_t>(k)) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = sq_dist(points[i], centroids[0]);
      for (size_t c = 1; c < centroids.size(); ++c) {
        best = std::min(best, sq_dist(points[i], centroids[c]));
      }
      d2[i] = best;
      total += best;
    }
    size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;  // guards against round-off at the top end
      for (size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (r < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

KMeansResult kmeans(const std::vector<std::vector<double>>& points,
                    const KMeansConfig& cfg, uint64_t seed) {
  check_points(points);
  if (cfg.k < 1) throw PreconditionError("k must be >= 1");
  if (points.size() < static_cast<size_t>(cfg.k)) {
    throw TooFewPoints("cannot form " + std::to_string(cfg.k) +
                       " clusters from " + std::to_string(points.size()) +
                       " points");
  }
  if (cfg.n_restarts < 1) throw PreconditionError("n_restarts must be >= 1");
  if (cfg.max_iter < 1) throw PreconditionError("max_iter must be >= 1");
  if (cfg.tol < 0.0) throw PreconditionError("tol must be >= 0");

  KMeansResult best;
  bool have = false;
  for (int r = 0; r < cfg.n_restarts; ++r) {
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(r)));
    KMeansResult res = run_once(points, cfg, rng);
    res.restart = r;
    if (!have || res.wcss < best.wcss) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

std::vector<ElbowPoint> elbow_curve(const std::vector<std::vector<double>>& points,
                                    int k_min, int k_max,
                                    const KMeansConfig& base, uint64_t seed) {
  check_points(points);
  if (k_min < 1 || k_max < k_min) {
    throw PreconditionError("elbow_curve: need 1 <= k_min <= k_max");
  }
  const int cap = static_cast<int>(
      std::min<size_t>(points.size(), static_cast<size_t>(k_max)));
  std::vector<ElbowPoint> curve;
  for (int k = k_min; k <= cap; ++k) {
    KMeansConfig cfg = base;
    cfg.k = k;
    const KMeansResult res =
        kmeans(points, cfg, Rng::derive(seed, static_cast<uint64_t>(k)));
    curve.push_back({k, res.wcss});
  }
  return curve;
}

double silhouette_mean(const std::vector<std::vector<double>>& points,
                       const std::vector<int>& assignment) {
  check_points(points);
  if (points.size() != assignment.size()) {
    throw LengthMismatch("silhouette_mean: " + std::to_string(points.size()) +
                         " points vs " + std::to_string(assignment.size()) +
                         " labels");
  }
  int max_label = -1;
  for (int a : assignment) {
    if (a < 0) throw PreconditionError("silhouette_mean: negative label");
    max_label = std::max(max_label, a);
  }
  const size_t n_labels = static_cast<size_t>(max_label) + 1;
  std::vector<size_t> counts(n_labels, 0);
  for (int a : assignment) counts[static_cast<size_t>(a)] += 1;
  size_t populated = 0;
  for (size_t c : counts) populated += c > 0 ? 1 : 0;
  if (populated < 2) {
    throw SingleCluster("silhouette needs at least two populated clusters");
  }

  const size_t n = points.size();
  double total = 0.0;
  std::vector<double> sums(n_labels, 0.0);
  for (size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<size_t>(assignment[j])] +=
          std::sqrt(sq_dist(points[i], points[j]));
    }
    const auto own = static_cast<size_t>(assignment[i]);
    if (counts[own] == 1) continue;  // singleton scores 0
    const double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < n_labels; ++c) {
      if (c == own || counts[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

KSelection select_k(const std::vector<std::vector<double>>& points, int k_min,
                    int k_max, const KMeansConfig& base, uint64_t seed) {
  check_points(points);
  if (k_min < 2) throw PreconditionError("select_k: k_min must be >= 2");
  if (k_max < k_min) throw PreconditionError("select_k: k_max < k_min");
  const int cap = static_cast<int>(
      std::min<size_t>(points.size(), static_cast<size_t>(k_max)));
  if (cap < k_min) {
    throw TooFewPoints("select_k: not enough points for k_min clusters");
  }

  KSelection sel;
  for (int k = k_min; k <= cap; ++k) {
    KMeansConfig cfg = base;
    cfg.k = k;
    const KMeansResult res =
        kmeans(points, cfg, Rng::derive(seed, static_cast<uint64_t>(k)));
    const double s = silhouette_mean(points, res.assignment);
    sel.per_k.push_back({k, s});
    if (sel.k == 0 || s > sel.silhouette) {
      sel.k = k;
      sel.silhouette = s;
    }
  }
  return sel;
}

}  // namespace coughpipe
