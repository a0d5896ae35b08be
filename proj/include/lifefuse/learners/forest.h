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

#ifndef LIFEFUSE_LEARNERS_FOREST_H_
#define LIFEFUSE_LEARNERS_FOREST_H_

#include <vector>

#include "lifefuse/learner.h"
#include "lifefuse/learners/tree.h"

namespace lifefuse {

// Average of variance-reduction trees, each grown on a bootstrap sample with
// a random feature subset per split. Tree t draws from
// DeriveSeed(seed, {t}), so trees can be grown in parallel.
class RandomForestRegressor : public Learner {
 public:
  explicit RandomForestRegressor(ForestParams params = {}) : params_(params) {}

  std::string_view kind() const override { return "rf"; }
  nlohmann::json Descriptor() const override;

  const std::vector<RegressionTree>& trees() const { return trees_; }

 protected:
  void DoFit(const DataTable& table) override;
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override;
  nlohmann::json StateJson() const override;
  void LoadState(const nlohmann::json& state) override;

 private:
  ForestParams params_;
  std::vector<RegressionTree> trees_;
};

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNERS_FOREST_H_
