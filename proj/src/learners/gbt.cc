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

#include "lifefuse/learners/gbt.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lifefuse/error.h"
#include "lifefuse/random.h"

namespace lifefuse {

using nlohmann::json;

json GbtRegressor::Descriptor() const {
  return {{"kind", "gbt"},
          {"params",
           {{"n_trees", params_.n_trees},
            {"max_depth", params_.max_depth},
            {"learning_rate", params_.learning_rate},
            {"min_leaf", params_.min_leaf},
            {"subsample", params_.subsample},
            {"seed", params_.seed}}}};
}

void GbtRegressor::DoFit(const DataTable& table) {
  if (table.rows() < 2) Fail(ErrorCode::kEmptyTable, "gbt needs >= 2 rows");
  const auto& x = table.features();
  const auto& y = table.target();
  const auto n = table.rows();
  const TreeParams tree_params{params_.max_depth, params_.min_leaf, 0};

  base_ = y.mean();
  trees_.clear();
  training_loss_.clear();
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(y.size(), base_);
  training_loss_.push_back((y - pred).squaredNorm() / static_cast<double>(n));

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const auto sample_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(params_.subsample * static_cast<double>(n))));
  Rng rng(params_.seed);

  for (int t = 0; t < params_.n_trees; ++t) {
    const Eigen::VectorXd residual = y - pred;
    std::vector<std::size_t> rows = all;
    if (sample_size < n) {
      rng.Shuffle(std::span<std::size_t>(rows));
      rows.resize(sample_size);
      std::sort(rows.begin(), rows.end());
    }
    trees_.push_back(RegressionTree::Fit(x, residual, rows, tree_params));
    pred += params_.learning_rate * trees_.back().Predict(x);
    training_loss_.push_back((y - pred).squaredNorm() /
                             static_cast<double>(n));
  }
}

Eigen::VectorXd GbtRegressor::DoPredictRows(const FeatureMatrix& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), base_);
  for (const auto& tree : trees_) out += params_.learning_rate * tree.Predict(x);
  return out;
}

json GbtRegressor::StateJson() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(t.ToJson());
  return {{"base", base_}, {"trees", trees}};
}

void GbtRegressor::LoadState(const json& state) {
  base_ = state.at("base").get<double>();
  trees_.clear();
  for (const auto& t : state.at("trees")) {
    trees_.push_back(RegressionTree::FromJson(t));
  }
}

}  // namespace lifefuse
