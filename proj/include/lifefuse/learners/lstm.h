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

#ifndef LIFEFUSE_LEARNERS_LSTM_H_
#define LIFEFUSE_LEARNERS_LSTM_H_

#include <vector>

#include <Eigen/Dense>

#include "lifefuse/learner.h"
#include "lifefuse/learners/knn.h"
#include "lifefuse/random.h"

namespace lifefuse {

// steps[t] holds the inputs of time step t for the whole batch, F x B.
struct SequenceBatch {
  std::vector<Eigen::MatrixXd> steps;

  Eigen::Index batch_size() const { return steps.empty() ? 0 : steps[0].cols(); }
};

// Single-layer LSTM with a linear read-out of the last hidden state.
//
//   z_t = W [x_t; h_{t-1}] + b,  z = [z_i; z_f; z_g; z_o]
//   i = sig(z_i)  f = sig(z_f)  g = tanh(z_g)  o = sig(z_o)
//   c_t = f * c_{t-1} + i * g,   h_t = o * tanh(c_t)
//   y = w' h_T + b_out
//
// Parameters live in one flat vector: W (4H x (F+H), column-major), b (4H),
// w (H), b_out. Loss is sum((y - target)^2) / (2B).
class LstmNetwork {
 public:
  LstmNetwork(int inputs, int hidden);

  static Eigen::Index ParameterCount(int inputs, int hidden);

  int inputs() const { return inputs_; }
  int hidden() const { return hidden_; }
  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }

  // Uniform in +-1/sqrt(fan_in) for every weight and bias.
  void InitUniform(Rng& rng);

  Eigen::VectorXd Forward(const SequenceBatch& batch) const;
  // h_T, H x B.
  Eigen::MatrixXd FinalHidden(const SequenceBatch& batch) const;

  double Loss(const SequenceBatch& batch, const Eigen::VectorXd& target) const;
  // Backpropagation through time; grad is resized to ParameterCount.
  double LossAndGradient(const SequenceBatch& batch,
                         const Eigen::VectorXd& target,
                         Eigen::VectorXd* grad) const;

 private:
  int inputs_;
  int hidden_;
  Eigen::VectorXd theta_;
};

struct SequencePrediction {
  Eigen::VectorXd values;
  // False for rows without window-1 preceding cycles of the same cell. Those
  // values are filled with the mean of the cell's covered predictions, or the
  // context-free row prediction when the cell has none.
  std::vector<bool> covered;
};

// Sequence regressor over windows of consecutive cycles of one cell; the
// target of a window is the capacity at its last cycle. Inputs and target are
// standardized internally with training statistics.
class LstmRegressor : public Learner {
 public:
  explicit LstmRegressor(LstmParams params = {});

  std::string_view kind() const override { return "lstm"; }
  nlohmann::json Descriptor() const override;

  const LstmParams& params() const { return params_; }
  const LstmNetwork& network() const { return network_; }

  SequencePrediction PredictWithCoverage(const DataTable& table) const;

 protected:
  void DoFit(const DataTable& table) override;
  Eigen::VectorXd DoPredict(const DataTable& table) const override;
  // Each row is read as a steady-state sequence of `window` identical steps.
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override;
  nlohmann::json StateJson() const override;
  void LoadState(const nlohmann::json& state) override;

 private:
  Eigen::VectorXd RunNetwork(const SequenceBatch& batch) const;

  LstmParams params_;
  ColumnScaler scaler_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  LstmNetwork network_;
};

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNERS_LSTM_H_
