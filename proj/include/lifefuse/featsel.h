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

#ifndef LIFEFUSE_FEATSEL_H_
#define LIFEFUSE_FEATSEL_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lifefuse/data.h"
#include "lifefuse/error.h"

namespace lifefuse {

// Pearson product-moment correlation of two equally long vectors. Throws
// LengthMismatch, or ConstantInput when either side has zero spread.
template <typename DerivedX, typename DerivedY>
double Pearson(const Eigen::MatrixBase<DerivedX>& x,
               const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() != y.size()) {
    Fail(ErrorCode::kLengthMismatch, "pearson inputs differ in length");
  }
  if (x.size() < 2) {
    Fail(ErrorCode::kLengthMismatch, "pearson needs at least 2 samples");
  }
  using Scalar = typename DerivedX::Scalar;
  const auto dx = (x.array() - x.mean()).eval();
  const auto dy = (y.array() - y.mean()).eval();
  const Scalar sxx = dx.square().sum();
  const Scalar syy = dy.square().sum();
  if (!(sxx > Scalar(0)) || !(syy > Scalar(0))) {
    Fail(ErrorCode::kConstantInput, "pearson input is constant");
  }
  const Scalar r = (dx * dy).sum() / std::sqrt(sxx * syy);
  return static_cast<double>(std::clamp(r, Scalar(-1), Scalar(1)));
}

// Student-t distribution with `dof` degrees of freedom, evaluated by adaptive
// Gauss-Kronrod quadrature of the density (absolute accuracy ~1e-12).
double StudentTCdf(double t, double dof);
// Two-sided p-value P(|T| >= |t|).
double StudentTTwoSidedP(double t, double dof);
// p-value for a sample correlation r over n samples (t = r sqrt(n-2) /
// sqrt(1-r^2)). |r| = 1 gives 0; n < 3 gives 1 for |r| < 1.
double CorrelationPValue(double r, std::size_t n);

struct CorrelationReport {
  Schema features;
  Eigen::MatrixXd r;  // symmetric, unit diagonal
  Eigen::MatrixXd p;  // symmetric, zero diagonal
  std::size_t n = 0;
};

// Throws ConstantInput naming the first constant feature.
CorrelationReport CorrelationMatrix(const DataTable& table);

struct DroppedFeature {
  FeatureId feature;
  FeatureId peer;  // the partner in the pair that triggered the drop
  double abs_r;
};

struct PruneResult {
  Schema retained;
  std::vector<DroppedFeature> dropped;
};

// Greedy elimination: while some retained pair has |r| >= threshold, take the
// pair with the largest |r| (first in row-major order on ties) and drop the
// member whose mean |r| against the other retained features is larger (the
// later schema position on ties).
PruneResult PruneMulticollinear(const CorrelationReport& report,
                                double threshold);

// Long-format rows feature_a,feature_b,r,p over the full matrix, row-major.
void WriteHeatmap(const CorrelationReport& report, std::ostream& out);
void ExportHeatmap(const CorrelationReport& report,
                   const std::filesystem::path& path);
CorrelationReport ReadHeatmap(std::istream& in);

nlohmann::json PruneToJson(const PruneResult& result, double threshold);

}  // namespace lifefuse

#endif  // LIFEFUSE_FEATSEL_H_
