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

#ifndef COUGHPIPE_FOREST_H_
#define COUGHPIPE_FOREST_H_

#include <cstdint>
#include <vector>

#include "coughpipe/rng.h"

namespace coughpipe {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 0;          // 0 = grow until pure or unsplittable
  int min_samples_split = 2;  // nodes smaller than this become leaves
  int mtry = 0;               // features tried per split; 0 = floor(sqrt(d))
};

// One node of a binary decision tree. Interior nodes route
// x[feature] <= threshold to `left`, otherwise to `right`; leaves have
// feature == -1 and carry the predicted label.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at index 0
};

struct RandomForest {
  ForestConfig config;
  int feature_dim = 0;
  std::vector<DecisionTree> trees;
};

// Gini impurity of a two-class sample: 1 - p0^2 - p1^2.
double gini_impurity(size_t n0, size_t n1);

// Fits n_trees CART trees on bootstrap resamples of (x, y) with Gini
// splitting. Each split examines a random feature subset of size mtry,
// extending past it only when none of the sampled features can separate
// the node, so every impure node with non-identical rows gets split.
// Tree t derives its random stream from (seed, t); training is
// deterministic for a fixed seed regardless of thread count.
//
// Throws PreconditionError (empty input, labels outside {0, 1}),
// LengthMismatch, DimensionMismatch (ragged feature rows).
RandomForest train_forest(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, const ForestConfig& cfg,
                          uint64_t seed);

int tree_predict(const DecisionTree& tree, const std::vector<double>& x);

// Fraction of trees voting for class 1.
double forest_prob(const RandomForest& forest, const std::vector<double>& x);

// Majority vote; an exact tie yields class 0.
int forest_predict(const RandomForest& forest, const std::vector<double>& x);

std::vector<double> forest_prob_batch(
    const RandomForest& forest, const std::vector<std::vector<double>>& x);

}  // namespace coughpipe

#endif  // COUGHPIPE_FOREST_H_
