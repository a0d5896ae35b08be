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

#ifndef LIFEFUSE_LEARNERS_MLP_H_
#define LIFEFUSE_LEARNERS_MLP_H_

#include <vector>

#include <Eigen/Dense>

#include "lifefuse/learner.h"
#include "lifefuse/learners/knn.h"
#include "lifefuse/random.h"

namespace lifefuse {

// Feed-forward network, tanh hidden layers, linear scalar output. With no
// hidden layers it is a linear model. Per layer the flat parameter vector
// holds W (out x in, column-major) followed by b (out).
class MlpNetwork {
 public:
  MlpNetwork(int inputs, std::vector<int> hidden);

  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }
  const std::vector<int>& widths() const { return widths_; }

  void InitUniform(Rng& rng);

  // x is F x B.
  Eigen::VectorXd Forward(const Eigen::MatrixXd& x) const;
  double LossAndGradient(const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& target,
                         Eigen::VectorXd* grad) const;

 private:
  std::vector<int> widths_;  // inputs, hidden..., 1
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd theta_;
};

class MlpRegressor : public Learner {
 public:
  explicit MlpRegressor(MlpParams params = {});

  std::string_view kind() const override { return "mlp"; }
  nlohmann::json Descriptor() const override;

  const MlpNetwork& network() const { return network_; }

 protected:
  void DoFit(const DataTable& table) override;
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override;
  nlohmann::json StateJson() const override;
  void LoadState(const nlohmann::json& state) override;

 private:
  MlpParams params_;
  ColumnScaler scaler_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  MlpNetwork network_;
};

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNERS_MLP_H_
