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

#include "lifefuse/learners/knn.h"

#include <algorithm>
#include <numeric>
#include <utility>

#include "lifefuse/error.h"

namespace lifefuse {

using nlohmann::json;

ColumnScaler ColumnScaler::Fit(const FeatureMatrix& x) {
  ColumnScaler s;
  s.mean = x.colwise().mean();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var =
        x.rows() > 1 ? (x.col(j).array() - s.mean(j)).square().sum() /
                           static_cast<double>(x.rows() - 1)
                     : 0.0;
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

FeatureMatrix ColumnScaler::Apply(const FeatureMatrix& x) const {
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

json ColumnScaler::ToJson() const {
  return {{"mean", VectorToJson(mean.transpose())},
          {"scale", VectorToJson(scale.transpose())}};
}

ColumnScaler ColumnScaler::FromJson(const json& j) {
  ColumnScaler s;
  s.mean = VectorFromJson(j.at("mean")).transpose();
  s.scale = VectorFromJson(j.at("scale")).transpose();
  return s;
}

json KnnRegressor::Descriptor() const {
  return {{"kind", "knn"}, {"params", {{"k", params_.k}}}};
}

void KnnRegressor::DoFit(const DataTable& table) {
  if (table.rows() < static_cast<std::size_t>(params_.k)) {
    Fail(ErrorCode::kInvalidArgument,
         "knn needs at least k = " + std::to_string(params_.k) + " rows");
  }
  scaler_ = ColumnScaler::Fit(table.features());
  train_x_ = scaler_.Apply(table.features());
  train_y_ = table.target();
}

Eigen::VectorXd KnnRegressor::DoPredictRows(const FeatureMatrix& x) const {
  const FeatureMatrix q = scaler_.Apply(x);
  const auto n = static_cast<std::size_t>(train_x_.rows());
  const auto k = static_cast<std::size_t>(params_.k);
  Eigen::VectorXd out(q.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      dist[r] = {(train_x_.row(static_cast<Eigen::Index>(r)) - q.row(i))
                     .squaredNorm(),
                 r};
    }
    // Pair ordering breaks distance ties by the lower row index.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k),
                      dist.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      sum += train_y_(static_cast<Eigen::Index>(dist[j].second));
    }
    out(i) = sum / static_cast<double>(k);
  }
  return out;
}

json KnnRegressor::StateJson() const {
  json rows = json::array();
  for (Eigen::Index i = 0; i < train_x_.rows(); ++i) {
    rows.push_back(VectorToJson(train_x_.row(i).transpose()));
  }
  return {{"scaler", scaler_.ToJson()},
          {"x", rows},
          {"y", VectorToJson(train_y_)}};
}

void KnnRegressor::LoadState(const json& state) {
  scaler_ = ColumnScaler::FromJson(state.at("scaler"));
  train_y_ = VectorFromJson(state.at("y"));
  const auto& rows = state.at("x");
  train_x_.resize(static_cast<Eigen::Index>(rows.size()), scaler_.mean.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    train_x_.row(static_cast<Eigen::Index>(i)) =
        VectorFromJson(rows[i]).transpose();
  }
}

}  // namespace lifefuse
