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

#ifndef LIFEFUSE_METRICS_H_
#define LIFEFUSE_METRICS_H_

#include <cmath>

#include <Eigen/Dense>

#include "lifefuse/error.h"

namespace lifefuse {
namespace internal {

template <typename A, typename B>
void CheckPaired(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& yhat) {
  if (y.size() != yhat.size()) {
    Fail(ErrorCode::kLengthMismatch, "metric inputs differ in length");
  }
  if (y.size() == 0) Fail(ErrorCode::kEmpty, "metric inputs are empty");
}

}  // namespace internal

// (1/n) sum |y - yhat|
template <typename A, typename B>
double Mae(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& yhat) {
  internal::CheckPaired(y, yhat);
  return static_cast<double>((y - yhat).array().abs().mean());
}

// sqrt((1/n) sum (y - yhat)^2)
template <typename A, typename B>
double Rmse(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& yhat) {
  internal::CheckPaired(y, yhat);
  return std::sqrt(static_cast<double>((y - yhat).array().square().mean()));
}

// 1 - SS_res / SS_tot with SS_tot about the mean of y itself.
template <typename A, typename B>
double R2(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& yhat) {
  internal::CheckPaired(y, yhat);
  if (y.size() < 2) {
    Fail(ErrorCode::kLengthMismatch, "r2 needs at least 2 samples");
  }
  const double ss_tot =
      static_cast<double>((y.array() - y.mean()).square().sum());
  if (!(ss_tot > 0.0)) Fail(ErrorCode::kConstantTarget, "r2 target is constant");
  const double ss_res = static_cast<double>((y - yhat).array().square().sum());
  return 1.0 - ss_res / ss_tot;
}

// Population variance.
template <typename A>
double Variance(const Eigen::MatrixBase<A>& v) {
  if (v.size() == 0) Fail(ErrorCode::kEmpty, "variance of an empty vector");
  return static_cast<double>((v.array() - v.mean()).square().mean());
}

// Relative gains of `best` over `other`, in percent, with the direction used
// in the model comparison tables: R^2 is an increase, errors are reductions.
inline double R2ImprovementPct(double best, double other) {
  return 100.0 * (best - other) / other;
}
inline double ErrorReductionPct(double best, double other) {
  return 100.0 * (other - best) / other;
}

}  // namespace lifefuse

#endif  // LIFEFUSE_METRICS_H_
