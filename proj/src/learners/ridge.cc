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

#include "lifefuse/learners/ridge.h"

namespace lifefuse {

using nlohmann::json;

json RidgeRegressor::Descriptor() const {
  return {{"kind", "ridge"},
          {"params",
           {{"lambda", params_.lambda},
            {"fit_intercept", params_.fit_intercept}}}};
}

void RidgeRegressor::DoFit(const DataTable& table) {
  solution_ = RidgeSolve(table.features(), table.target(), params_.lambda,
                         params_.fit_intercept);
}

Eigen::VectorXd RidgeRegressor::DoPredictRows(const FeatureMatrix& x) const {
  return (x * solution_.coef).array() + solution_.intercept;
}

json RidgeRegressor::StateJson() const {
  return {{"coef", VectorToJson(solution_.coef)},
          {"intercept", solution_.intercept}};
}

void RidgeRegressor::LoadState(const json& state) {
  solution_.coef = VectorFromJson(state.at("coef"));
  solution_.intercept = state.at("intercept").get<double>();
}

json MeanRegressor::Descriptor() const {
  return {{"kind", "mean"}, {"params", json::object()}};
}

void MeanRegressor::DoFit(const DataTable& table) {
  mean_ = table.target().mean();
}

Eigen::VectorXd MeanRegressor::DoPredictRows(const FeatureMatrix& x) const {
  return Eigen::VectorXd::Constant(x.rows(), mean_);
}

json MeanRegressor::StateJson() const { return {{"mean", mean_}}; }

void MeanRegressor::LoadState(const json& state) {
  mean_ = state.at("mean").get<double>();
}

}  // namespace lifefuse
