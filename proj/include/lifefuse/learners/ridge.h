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

#ifndef LIFEFUSE_LEARNERS_RIDGE_H_
#define LIFEFUSE_LEARNERS_RIDGE_H_

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "lifefuse/error.h"
#include "lifefuse/learner.h"

namespace lifefuse {

struct RidgeSolution {
  Eigen::VectorXd coef;
  double intercept = 0.0;
};

// Solves (Xc' Xc + lambda I) beta = Xc' yc by Cholesky, where Xc, yc are
// column-centred when fit_intercept (intercept = ybar - xbar' beta) and raw
// otherwise. Throws SingularSystem when the system is not positive definite,
// which for lambda = 0 means X is rank deficient.
template <typename DerivedX, typename DerivedY>
RidgeSolution RidgeSolve(const Eigen::MatrixBase<DerivedX>& x,
                         const Eigen::MatrixBase<DerivedY>& y, double lambda,
                         bool fit_intercept = true) {
  if (x.rows() != y.size()) {
    Fail(ErrorCode::kLengthMismatch, "ridge design and target lengths differ");
  }
  if (x.rows() == 0 || x.cols() == 0) {
    Fail(ErrorCode::kEmptyTable, "ridge needs at least one row and feature");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    Fail(ErrorCode::kInvalidArgument, "ridge lambda must be finite and >= 0");
  }
  Eigen::MatrixXd xc = x.template cast<double>();
  Eigen::VectorXd yc = y.template cast<double>();
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(xc.cols());
  double y_mean = 0.0;
  if (fit_intercept) {
    x_mean = xc.colwise().mean();
    y_mean = yc.mean();
    xc.rowwise() -= x_mean;
    yc.array() -= y_mean;
  }
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  bool singular = llt.info() != Eigen::Success;
  if (!singular) {
    // A numerically zero pivot means the Gram matrix is semidefinite.
    const double scale = std::max(1.0, gram.diagonal().maxCoeff());
    const Eigen::MatrixXd l = llt.matrixL();
    singular = l.diagonal().array().square().minCoeff() < 1e-13 * scale;
  }
  if (singular) {
    Fail(ErrorCode::kSingularSystem,
         "normal equations are not positive definite (lambda = " +
             std::to_string(lambda) + ")");
  }
  RidgeSolution sol;
  sol.coef = llt.solve(xc.transpose() * yc);
  sol.intercept = fit_intercept ? y_mean - x_mean.dot(sol.coef) : 0.0;
  return sol;
}

class RidgeRegressor : public Learner {
 public:
  explicit RidgeRegressor(RidgeParams params = {}) : params_(params) {}

  std::string_view kind() const override { return "ridge"; }
  nlohmann::json Descriptor() const override;

  const RidgeSolution& solution() const { return solution_; }
  const RidgeParams& params() const { return params_; }

 protected:
  void DoFit(const DataTable& table) override;
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override;
  nlohmann::json StateJson() const override;
  void LoadState(const nlohmann::json& state) override;

 private:
  RidgeParams params_;
  RidgeSolution solution_;
};

class MeanRegressor : public Learner {
 public:
  std::string_view kind() const override { return "mean"; }
  nlohmann::json Descriptor() const override;

 protected:
  void DoFit(const DataTable& table) override;
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override;
  nlohmann::json StateJson() const override;
  void LoadState(const nlohmann::json& state) override;

 private:
  double mean_ = 0.0;
};

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNERS_RIDGE_H_
