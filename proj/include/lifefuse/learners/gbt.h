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

#ifndef LIFEFUSE_LEARNERS_GBT_H_
#define LIFEFUSE_LEARNERS_GBT_H_

#include <vector>

#include "lifefuse/learner.h"
#include "lifefuse/learners/tree.h"

namespace lifefuse {

// Squared-loss gradient boosting: F_0 = mean(y), F_m = F_{m-1} + lr * tree_m
// where tree_m is fit to the residuals y - F_{m-1} on an optional row
// subsample.
class GbtRegressor : public Learner {
 public:
  explicit GbtRegressor(GbtParams params = {}) : params_(params) {}

  std::string_view kind() const override { return "gbt"; }
  nlohmann::json Descriptor() const override;

  const GbtParams& params() const { return params_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  double base_score() const { return base_; }
  // Training MSE after 0, 1, ..., n_trees trees (from the last Fit only).
  const std::vector<double>& training_loss() const { return training_loss_; }

 protected:
  void DoFit(const DataTable& table) override;
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override;
  nlohmann::json StateJson() const override;
  void LoadState(const nlohmann::json& state) override;

 private:
  GbtParams params_;
  double base_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::vector<double> training_loss_;
};

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNERS_GBT_H_
