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

#include "lifefuse/learners/mlp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lifefuse/error.h"
#include "lifefuse/learners/adam.h"

namespace lifefuse {

using nlohmann::json;

MlpNetwork::MlpNetwork(int inputs, std::vector<int> hidden) {
  widths_.push_back(inputs);
  for (int w : hidden) widths_.push_back(w);
  widths_.push_back(1);
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(widths_[l + 1]) * (widths_[l] + 1);
  }
  offsets_.push_back(total);
  theta_ = Eigen::VectorXd::Zero(total);
}

void MlpNetwork::InitUniform(Rng& rng) {
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    for (Eigen::Index k = offsets_[l]; k < offsets_[l + 1]; ++k) {
      theta_(k) = rng.Uniform(-bound, bound);
    }
  }
}

Eigen::VectorXd MlpNetwork::Forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  const std::size_t layers = widths_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::Index in = widths_[l];
    const Eigen::Index out = widths_[l + 1];
    Eigen::Map<const Eigen::MatrixXd> w(theta_.data() + offsets_[l], out, in);
    Eigen::Map<const Eigen::VectorXd> b(theta_.data() + offsets_[l] + out * in,
                                        out);
    Eigen::MatrixXd z = (w * a).colwise() + b;
    a = l + 1 < layers ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
  return a.row(0).transpose();
}

double MlpNetwork::LossAndGradient(const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& target,
                                   Eigen::VectorXd* grad) const {
  const std::size_t layers = widths_.size() - 1;
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::Index in = widths_[l];
    const Eigen::Index out = widths_[l + 1];
    Eigen::Map<const Eigen::MatrixXd> w(theta_.data() + offsets_[l], out, in);
    Eigen::Map<const Eigen::VectorXd> b(theta_.data() + offsets_[l] + out * in,
                                        out);
    Eigen::MatrixXd z = (w * acts.back()).colwise() + b;
    acts.push_back(l + 1 < layers ? Eigen::MatrixXd(z.array().tanh()) : z);
  }
  const double inv_b = 1.0 / static_cast<double>(x.cols());
  const Eigen::RowVectorXd err = acts.back().row(0) - target.transpose();
  const double loss = 0.5 * err.squaredNorm() * inv_b;

  grad->setZero(theta_.size());
  Eigen::MatrixXd delta = err * inv_b;  // 1 x B
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::Index in = widths_[l];
    const Eigen::Index out = widths_[l + 1];
    Eigen::Map<Eigen::MatrixXd> dw(grad->data() + offsets_[l], out, in);
    Eigen::Map<Eigen::VectorXd> db(grad->data() + offsets_[l] + out * in, out);
    dw.noalias() = delta * acts[l].transpose();
    db = delta.rowwise().sum();
    if (l > 0) {
      Eigen::Map<const Eigen::MatrixXd> w(theta_.data() + offsets_[l], out, in);
      delta = ((w.transpose() * delta).array() *
               (1.0 - acts[l].array().square()))
                  .matrix();
    }
  }
  return loss;
}

MlpRegressor::MlpRegressor(MlpParams params)
    : params_(std::move(params)), network_(1, params_.hidden) {}

json MlpRegressor::Descriptor() const {
  return {{"kind", "mlp"},
          {"params",
           {{"hidden", params_.hidden},
            {"epochs", params_.epochs},
            {"batch", params_.batch},
            {"step_size", params_.step_size},
            {"seed", params_.seed},
            {"grad_clip", params_.grad_clip}}}};
}

void MlpRegressor::DoFit(const DataTable& table) {
  scaler_ = ColumnScaler::Fit(table.features());
  const Eigen::MatrixXd xs = scaler_.Apply(table.features()).transpose();
  const auto& y = table.target();
  y_mean_ = y.mean();
  const double var =
      y.size() > 1 ? (y.array() - y_mean_).square().sum() /
                         static_cast<double>(y.size() - 1)
                   : 0.0;
  y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd ys = (y.array() - y_mean_) / y_scale_;

  network_ = MlpNetwork(static_cast<int>(table.num_features()), params_.hidden);
  Rng init_rng(DeriveSeed(params_.seed, {0}));
  network_.InitUniform(init_rng);
  Rng order_rng(DeriveSeed(params_.seed, {1}));
  Adam adam(network_.parameters().size(), AdamConfig{params_.step_size});

  const auto n = table.rows();
  const auto batch_size = std::min(n, static_cast<std::size_t>(params_.batch));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    if (batch_size < n) order_rng.Shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(n, start + batch_size);
      const auto nb = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xb(xs.rows(), nb);
      Eigen::VectorXd yb(nb);
      for (Eigen::Index k = 0; k < nb; ++k) {
        const auto r = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(k)]);
        xb.col(k) = xs.col(r);
        yb(k) = ys(r);
      }
      const double loss = network_.LossAndGradient(xb, yb, &grad);
      if (!std::isfinite(loss)) {
        Fail(ErrorCode::kNumericalFailure, "mlp loss diverged");
      }
      ClipGradientNorm(grad, params_.grad_clip);
      adam.Step(network_.parameters(), grad);
    }
  }
}

Eigen::VectorXd MlpRegressor::DoPredictRows(const FeatureMatrix& x) const {
  const Eigen::MatrixXd xs = scaler_.Apply(x).transpose();
  return (network_.Forward(xs).array() * y_scale_ + y_mean_).matrix();
}

json MlpRegressor::StateJson() const {
  return {{"scaler", scaler_.ToJson()},
          {"y_mean", y_mean_},
          {"y_scale", y_scale_},
          {"inputs", network_.widths().front()},
          {"theta", VectorToJson(network_.parameters())}};
}

void MlpRegressor::LoadState(const json& state) {
  scaler_ = ColumnScaler::FromJson(state.at("scaler"));
  y_mean_ = state.at("y_mean").get<double>();
  y_scale_ = state.at("y_scale").get<double>();
  network_ = MlpNetwork(state.at("inputs").get<int>(), params_.hidden);
  const Eigen::VectorXd theta = VectorFromJson(state.at("theta"));
  if (theta.size() != network_.parameters().size()) {
    Fail(ErrorCode::kInvalidConfig, "mlp parameter count mismatch");
  }
  network_.parameters() = theta;
}

}  // namespace lifefuse
