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

#ifndef LIFEFUSE_LEARNERS_KNN_H_
#define LIFEFUSE_LEARNERS_KNN_H_

#include "lifefuse/learner.h"

namespace lifefuse {

// Column z-scores fitted on a training matrix; zero-spread columns keep unit
// scale.
struct ColumnScaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static ColumnScaler Fit(const FeatureMatrix& x);
  FeatureMatrix Apply(const FeatureMatrix& x) const;
  nlohmann::json ToJson() const;
  static ColumnScaler FromJson(const nlohmann::json& j);
};

// Mean target of the k nearest training rows under Euclidean distance on
// standardized features; equal distances resolve to the lower row index.
class KnnRegressor : public Learner {
 public:
  explicit KnnRegressor(KnnParams params = {}) : params_(params) {}

  std::string_view kind() const override { return "knn"; }
  nlohmann::json Descriptor() const override;

 protected:
  void DoFit(const DataTable& table) override;
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override;
  nlohmann::json StateJson() const override;
  void LoadState(const nlohmann::json& state) override;

 private:
  KnnParams params_;
  ColumnScaler scaler_;
  FeatureMatrix train_x_;  // standardized
  Eigen::VectorXd train_y_;
};

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNERS_KNN_H_
