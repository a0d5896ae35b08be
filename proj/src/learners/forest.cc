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

#include "lifefuse/learners/forest.h"

#include <numeric>

#include "lifefuse/parallel.h"
#include "lifefuse/random.h"

namespace lifefuse {

using nlohmann::json;

json RandomForestRegressor::Descriptor() const {
  return {{"kind", "rf"},
          {"params",
           {{"n_trees", params_.n_trees},
            {"max_depth", params_.max_depth},
            {"features_per_split", params_.features_per_split},
            {"min_leaf", params_.min_leaf},
            {"bootstrap", params_.bootstrap},
            {"seed", params_.seed}}}};
}

void RandomForestRegressor::DoFit(const DataTable& table) {
  const auto& x = table.features();
  const auto& y = table.target();
  const auto n = table.rows();
  const int f = static_cast<int>(x.cols());
  TreeParams tree_params{params_.max_depth, params_.min_leaf,
                         params_.features_per_split};
  if (tree_params.features_per_split == 0) {
    tree_params.features_per_split = std::max(1, (f + 2) / 3);
  }

  std::vector<RegressionTree> trees(static_cast<std::size_t>(params_.n_trees));
  ParallelFor(trees.size(), [&](std::size_t t) {
    Rng rng(DeriveSeed(params_.seed, {t}));
    std::vector<std::size_t> rows(n);
    if (params_.bootstrap) {
      for (auto& r : rows) r = rng.UniformIndex(n);
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees[t] = RegressionTree::Fit(x, y, rows, tree_params, &rng);
  });
  trees_ = std::move(trees);
}

Eigen::VectorXd RandomForestRegressor::DoPredictRows(
    const FeatureMatrix& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  for (const auto& tree : trees_) out += tree.Predict(x);
  return out / static_cast<double>(trees_.size());
}

json RandomForestRegressor::StateJson() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(t.ToJson());
  return {{"trees", trees}};
}

void RandomForestRegressor::LoadState(const json& state) {
  trees_.clear();
  for (const auto& t : state.at("trees")) {
    trees_.push_back(RegressionTree::FromJson(t));
  }
}

}  // namespace lifefuse
