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

#include "coughpipe/forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coughpipe/errors.h"

namespace coughpipe {

double gini_impurity(size_t n0, size_t n1) {
  const size_t n = n0 + n1;
  if (n == 0) return 0.0;
  const double p0 = static_cast<double>(n0) / static_cast<double>(n);
  const double p1 = static_cast<double>(n1) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

namespace {

struct BestSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child Gini
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x,
              const std::vector<int>& y, const ForestConfig& cfg, int mtry,
              Rng& rng, std::vector<TreeNode>& nodes)
      : x_(x), y_(y), cfg_(cfg), mtry_(mtry), rng_(rng), nodes_(nodes) {
    feature_order_.resize(x.front().size());
  }

  int build(std::vector<int>& idx, int depth) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    size_t n1 = 0;
    for (int i : idx) n1 += static_cast<size_t>(y_[i]);
    const size_t n0 = idx.size() - n1;
    // Tie goes to class 0.
    nodes_[node_id].label = n1 > n0 ? 1 : 0;

    const bool pure = n0 == 0 || n1 == 0;
    const bool too_small =
        idx.size() < static_cast<size_t>(cfg_.min_samples_split);
    const bool too_deep = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
    if (pure || too_small || too_deep) return node_id;

    const BestSplit split = find_split(idx);
    if (!split.found) return node_id;

    std::vector<int> left_idx;
    std::vector<int> right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (int i : idx) {
      (x_[i][split.feature] <= split.threshold ? left_idx : right_idx)
          .push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    const int left = build(left_idx, depth + 1);
    const int right = build(right_idx, depth + 1);
    nodes_[node_id].feature = split.feature;
    nodes_[node_id].threshold = split.threshold;
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    return node_id;
  }

 private:
  BestSplit find_split(const std::vector<int>& idx) {
    std::iota(feature_order_.begin(), feature_order_.end(), 0);
    rng_.shuffle(feature_order_);

    BestSplit best;
    int visited = 0;
    for (int f : feature_order_) {
      // Keep scanning past mtry only while no feature has produced a
      // usable threshold, so a splittable impure node never turns into a
      // leaf just because the sampled subset was constant.
      if (visited >= mtry_ && best.found) break;
      ++visited;
      scan_feature(idx, f, best);
    }
    return best;
  }

  void scan_feature(const std::vector<int>& idx, int f, BestSplit& best) {
    sorted_.clear();
    sorted_.reserve(idx.size());
    for (int i : idx) sorted_.emplace_back(x_[i][f], y_[i]);
    std::sort(sorted_.begin(), sorted_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    const size_t n = sorted_.size();
    size_t total1 = 0;
    for (const auto& [v, label] : sorted_) total1 += static_cast<size_t>(label);

    size_t left_n = 0;
    size_t left1 = 0;
    for (size_t i = 0; i + 1 < n; ++i) {
      ++left_n;
      left1 += static_cast<size_t>(sorted_[i].second);
      if (sorted_[i].first == sorted_[i + 1].first) continue;
      double thr = sorted_[i].first / 2.0 + sorted_[i + 1].first / 2.0;
      // Midpoints can round up onto the right value; fall back to the
      // left value so both children stay nonempty.
      if (thr >= sorted_[i + 1].first) thr = sorted_[i].first;
      const size_t right_n = n - left_n;
      const size_t right1 = total1 - left1;
      const double impurity =
          (static_cast<double>(left_n) * gini_impurity(left_n - left1, left1) +
           static_cast<double>(right_n) *
               gini_impurity(right_n - right1, right1)) /
          static_cast<double>(n);
      if (!best.found || impurity < best.impurity) {
        best.found = true;
        best.feature = f;
        best.threshold = thr;
        best.impurity = impurity;
      }
    }
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<int>& y_;
  const ForestConfig& cfg_;
  const int mtry_;
  Rng& rng_;
  std::vector<TreeNode>& nodes_;
  std::vector<int> feature_order_;
  std::vector<std::pair<double, int>> sorted_;
};

}  // namespace

RandomForest train_forest(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, const ForestConfig& cfg,
                          uint64_t seed) {
  if (x.empty()) throw PreconditionError("train_forest: empty training set");
  if (x.size() != y.size()) {
    throw LengthMismatch("train_forest: " + std::to_string(x.size()) +
                         " rows vs " + std::to_string(y.size()) + " labels");
  }
  if (cfg.n_trees <= 0) throw PreconditionError("n_trees must be > 0");
  if (cfg.min_samples_split < 2) {
    throw PreconditionError("min_samples_split must be >= 2");
  }
  const size_t d = x.front().size();
  if (d == 0) throw PreconditionError("train_forest: zero-width features");
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != d) {
      throw DimensionMismatch("train_forest: row " + std::to_string(i) +
                              " has " + std::to_string(x[i].size()) +
                              " features, expected " + std::to_string(d));
    }
    if (y[i] != 0 && y[i] != 1) {
      throw PreconditionError("train_forest: labels must be 0 or 1");
    }
  }

  RandomForest forest;
  forest.config = cfg;
  forest.feature_dim = static_cast<int>(d);
  forest.trees.resize(static_cast<size_t>(cfg.n_trees));

  int mtry = cfg.mtry > 0 ? cfg.mtry
                          : static_cast<int>(std::floor(
                                std::sqrt(static_cast<double>(d))));
  mtry = std::clamp(mtry, 1, static_cast<int>(d));

  for (int t = 0; t < cfg.n_trees; ++t) {
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(t)));
    std::vector<int> idx(x.size());
    for (auto& i : idx) {
      i = static_cast<int>(rng.uniform_index(x.size()));
    }
    TreeBuilder builder(x, y, cfg, mtry, rng,
                        forest.trees[static_cast<size_t>(t)].nodes);
    builder.build(idx, 0);
  }
  return forest;
}

int tree_predict(const DecisionTree& tree, const std::vector<double>& x) {
  if (tree.nodes.empty()) throw PreconditionError("tree_predict: empty tree");
  int node = 0;
  while (tree.nodes[static_cast<size_t>(node)].feature >= 0) {
    const TreeNode& cur = tree.nodes[static_cast<size_t>(node)];
    if (static_cast<size_t>(cur.feature) >= x.size()) {
      throw DimensionMismatch("tree_predict: sample narrower than the tree");
    }
    node = x[static_cast<size_t>(cur.feature)] <= cur.threshold ? cur.left
                                                                : cur.right;
  }
  return tree.nodes[static_cast<size_t>(node)].label;
}

double forest_prob(const RandomForest& forest, const std::vector<double>& x) {
  if (forest.trees.empty()) {
    throw PreconditionError("forest_prob: untrained forest");
  }
  if (x.size() != static_cast<size_t>(forest.feature_dim)) {
    throw DimensionMismatch("forest_prob: sample has " +
                            std::to_string(x.size()) + " features, expected " +
                            std::to_string(forest.feature_dim));
  }
  size_t votes = 0;
  for (const auto& tree : forest.trees) {
    votes += static_cast<size_t>(tree_predict(tree, x));
  }
  return static_cast<double>(votes) / static_cast<double>(forest.trees.size());
}

int forest_predict(const RandomForest& forest, const std::vector<double>& x) {
  return forest_prob(forest, x) > 0.5 ? 1 : 0;
}

std::vector<double> forest_prob_batch(
    const RandomForest& forest, const std::vector<std::vector<double>>& x) {
  std::vector<double> probs;
  probs.reserve(x.size());
  for (const auto& row : x) probs.push_back(forest_prob(forest, row));
  return probs;
}

}  // namespace coughpipe
