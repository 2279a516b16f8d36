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

#include <cmath>
#include <set>
#include <vector>

#include "coughpipe/errors.h"
#include "coughpipe/rng.h"
#include "doctest.h"

using namespace coughpipe;

TEST_CASE("gini impurity from the definition") {
  CHECK(gini_impurity(0, 0) == 0.0);
  CHECK(gini_impurity(10, 0) == doctest::Approx(0.0));
  CHECK(gini_impurity(0, 10) == doctest::Approx(0.0));
  CHECK(gini_impurity(5, 5) == doctest::Approx(0.5));
  // 3 of class 0, 1 of class 1: 1 - (3/4)^2 - (1/4)^2 = 6/16.
  CHECK(gini_impurity(3, 1) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(gini_impurity(2, 6) ==
        doctest::Approx(1.0 - 0.25 * 0.25 - 0.75 * 0.75).epsilon(1e-12));
}

TEST_CASE("a single tree separates one-dimensional data perfectly") {
  // Class is the sign of the only feature -- trivially splittable.
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    const double v = (i < 10) ? -1.0 - i * 0.1 : 1.0 + i * 0.1;
    x.push_back({v});
    y.push_back(i < 10 ? 0 : 1);
  }
  ForestConfig cfg;
  cfg.n_trees = 1;
  const RandomForest forest = train_forest(x, y, cfg, 3);
  REQUIRE(forest.trees.size() == 1);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(tree_predict(forest.trees[0], x[i]) == y[i]);
  }
}

TEST_CASE("training data is memorized when trees grow unbounded") {
  // Bootstrap resampling hides ~1/e of the rows from each tree, but with
  // enough trees the ensemble reproduces every training label of a
  // noiseless, well-separated problem.
  Rng rng(5);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    const int label = i % 2;
    x.push_back({rng.uniform(-0.4, 0.4) + (label ? 1.0 : -1.0),
                 rng.uniform(-1.0, 1.0)});
    y.push_back(label);
  }
  ForestConfig cfg;
  cfg.n_trees = 100;
  const RandomForest forest = train_forest(x, y, cfg, 7);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(forest_predict(forest, x[i]) == y[i]);
  }
}

TEST_CASE("forest probability is the fraction of voting trees") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    x.push_back({i < 15 ? -1.0 : 1.0, 0.0});
    y.push_back(i < 15 ? 0 : 1);
  }
  ForestConfig cfg;
  cfg.n_trees = 25;
  const RandomForest forest = train_forest(x, y, cfg, 11);
  const double p1 = forest_prob(forest, {2.0, 0.0});
  const double p0 = forest_prob(forest, {-2.0, 0.0});
  CHECK(p1 == doctest::Approx(1.0));
  CHECK(p0 == doctest::Approx(0.0));
  // Any probability must be a multiple of 1/25.
  const double p = forest_prob(forest, {0.01, 0.0});
  const double scaled = p * 25.0;
  CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
}

TEST_CASE("an exact vote tie predicts class 0") {
  // Build a 2-tree forest by hand to force the tie.
  RandomForest forest;
  forest.feature_dim = 1;
  forest.config.n_trees = 2;
  DecisionTree yes;
  yes.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 1});
  DecisionTree no;
  no.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 0});
  forest.trees = {yes, no};
  CHECK(forest_prob(forest, {0.0}) == doctest::Approx(0.5));
  CHECK(forest_predict(forest, {0.0}) == 0);
}

TEST_CASE("split thresholds route strictly by x <= threshold") {
  DecisionTree tree;
  tree.nodes.push_back(TreeNode{0, 1.5, 1, 2, 0});
  tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 0});  // left leaf
  tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 1});  // right leaf
  CHECK(tree_predict(tree, {1.5}) == 0);   // boundary goes left
  CHECK(tree_predict(tree, {1.51}) == 1);
  CHECK(tree_predict(tree, {-5.0}) == 0);
}

TEST_CASE("training is deterministic per seed and sensitive to it") {
  Rng rng(13);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    y.push_back(i % 2);
  }
  ForestConfig cfg;
  cfg.n_trees = 10;
  const RandomForest a = train_forest(x, y, cfg, 17);
  const RandomForest b = train_forest(x, y, cfg, 17);
  const RandomForest c = train_forest(x, y, cfg, 18);
  REQUIRE(a.trees.size() == b.trees.size());
  bool identical_ab = true;
  for (size_t t = 0; t < a.trees.size(); ++t) {
    if (a.trees[t].nodes.size() != b.trees[t].nodes.size()) {
      identical_ab = false;
      break;
    }
    for (size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
      const TreeNode& na = a.trees[t].nodes[n];
      const TreeNode& nb = b.trees[t].nodes[n];
      if (na.feature != nb.feature || na.threshold != nb.threshold ||
          na.left != nb.left || na.right != nb.right ||
          na.label != nb.label) {
        identical_ab = false;
      }
    }
  }
  CHECK(identical_ab);
  // A different seed should bootstrap differently somewhere.
  bool any_difference = a.trees.size() != c.trees.size();
  for (size_t t = 0; !any_difference && t < a.trees.size(); ++t) {
    if (a.trees[t].nodes.size() != c.trees[t].nodes.size()) {
      any_difference = true;
      break;
    }
    for (size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
      const TreeNode& na = a.trees[t].nodes[n];
      const TreeNode& nc = c.trees[t].nodes[n];
      if (na.feature != nc.feature || na.threshold != nc.threshold) {
        any_difference = true;
        break;
      }
    }
  }
  CHECK(any_difference);
}

TEST_CASE("max_depth one produces decision stumps") {
  Rng rng(19);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    x.push_back({rng.uniform(), rng.uniform()});
    y.push_back(i % 2);
  }
  ForestConfig cfg;
  cfg.n_trees = 5;
  cfg.max_depth = 1;
  const RandomForest forest = train_forest(x, y, cfg, 23);
  for (const auto& tree : forest.trees) {
    // A stump is at most a root plus two leaves.
    CHECK(tree.nodes.size() <= 3);
    for (const auto& node : tree.nodes) {
      if (node.feature >= 0) {
        // Children of the root must be leaves.
        CHECK(tree.nodes[static_cast<size_t>(node.left)].feature == -1);
        CHECK(tree.nodes[static_cast<size_t>(node.right)].feature == -1);
      }
    }
  }
}

TEST_CASE("min_samples_split stops the recursion early") {
  Rng rng(29);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) {
    x.push_back({rng.uniform()});
    y.push_back(i % 2);
  }
  ForestConfig fine;
  fine.n_trees = 3;
  ForestConfig coarse = fine;
  coarse.min_samples_split = 40;
  const RandomForest deep = train_forest(x, y, fine, 31);
  const RandomForest shallow = train_forest(x, y, coarse, 31);
  size_t deep_nodes = 0;
  size_t shallow_nodes = 0;
  for (const auto& t : deep.trees) deep_nodes += t.nodes.size();
  for (const auto& t : shallow.trees) shallow_nodes += t.nodes.size();
  CHECK(shallow_nodes < deep_nodes);
}

TEST_CASE("identical rows with mixed labels make a leaf, not a loop") {
  // Unsplittable node: every feature vector equal, labels disagree.
  std::vector<std::vector<double>> x(10, {1.0, 2.0});
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) y.push_back(i < 6 ? 1 : 0);
  ForestConfig cfg;
  cfg.n_trees = 5;
  const RandomForest forest = train_forest(x, y, cfg, 37);
  // Must terminate and predict the overall majority at least.
  const int pred = forest_predict(forest, {1.0, 2.0});
  CHECK((pred == 0 || pred == 1));
}

TEST_CASE("batch probabilities equal the scalar path") {
  Rng rng(41);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    x.push_back({rng.uniform(), rng.uniform()});
    y.push_back(i % 2);
  }
  ForestConfig cfg;
  cfg.n_trees = 9;
  const RandomForest forest = train_forest(x, y, cfg, 43);
  const auto batch = forest_prob_batch(forest, x);
  REQUIRE(batch.size() == x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(batch[i] == forest_prob(forest, x[i]));
  }
}

TEST_CASE("training validates its inputs") {
  ForestConfig cfg;
  CHECK_THROWS_AS(train_forest({}, {}, cfg, 1), PreconditionError);
  CHECK_THROWS_AS(train_forest({{1.0}}, {1, 0}, cfg, 1), LengthMismatch);
  CHECK_THROWS_AS(train_forest({{1.0}, {1.0, 2.0}}, {0, 1}, cfg, 1),
                  DimensionMismatch);
  CHECK_THROWS_AS(train_forest({{1.0}}, {2}, cfg, 1), PreconditionError);
  ForestConfig bad = cfg;
  bad.n_trees = 0;
  CHECK_THROWS_AS(train_forest({{1.0}}, {1}, bad, 1), PreconditionError);
  ForestConfig bad2 = cfg;
  bad2.min_samples_split = 1;
  CHECK_THROWS_AS(train_forest({{1.0}}, {1}, bad2, 1), PreconditionError);
}

TEST_CASE("mtry restriction still finds a split when it must") {
  // Only feature 7 is informative; with mtry = 1 most draws miss it, but
  // the builder keeps looking when nothing sampled separates the node.
  Rng rng(47);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> row(8, 0.5);  // constant noise features
    row[7] = i % 2 ? 1.0 : 0.0;
    x.push_back(row);
    y.push_back(i % 2);
  }
  ForestConfig cfg;
  cfg.n_trees = 10;
  cfg.mtry = 1;
  const RandomForest forest = train_forest(x, y, cfg, 53);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(forest_predict(forest, x[i]) == y[i]);
  }
}
