/*
 * Copyright 2026 The lifefuse Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LIFEFUSE_LEARNERS_TREE_H_
#define LIFEFUSE_LEARNERS_TREE_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lifefuse/data.h"
#include "lifefuse/random.h"

namespace lifefuse {

struct TreeParams {
  int max_depth = 3;
  int min_leaf = 1;
  // Features examined per node; 0 or >= F means all. Subsets need an Rng.
  int features_per_split = 0;
};

// Binary regression tree grown by greedy variance reduction. Candidate
// thresholds are midpoints between sorted unique values; equal gains keep the
// lower feature index, then the lower threshold. Rows go left when
// x <= threshold.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  // `rows` may repeat indices (bootstrap samples).
  static RegressionTree Fit(const FeatureMatrix& x, const Eigen::VectorXd& y,
                            std::span<const std::size_t> rows,
                            const TreeParams& params, Rng* rng = nullptr);

  template <typename Derived>
  double PredictOne(const Eigen::MatrixBase<Derived>& row) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const auto& n = nodes_[static_cast<std::size_t>(node)];
      node = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(node)].value;
  }

  Eigen::VectorXd Predict(const FeatureMatrix& x) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;

  nlohmann::json ToJson() const;
  static RegressionTree FromJson(const nlohmann::json& j);

 private:
  std::vector<Node> nodes_;
};

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNERS_TREE_H_
