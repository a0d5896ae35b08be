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

#ifndef LIFEFUSE_INTERPRET_H_
#define LIFEFUSE_INTERPRET_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lifefuse/data.h"
#include "lifefuse/learner.h"

namespace lifefuse {

// Vectorized black box: one output per row of the input.
using BatchModel = std::function<Eigen::VectorXd(const FeatureMatrix&)>;

BatchModel AsBatchModel(const Learner& model);

struct ShapMatrix {
  Schema features;
  double base_value = 0.0;        // mean output over the background rows
  Eigen::MatrixXd phi;            // instances x features
  Eigen::VectorXd output;         // f(x) per instance
  std::vector<std::size_t> instances;
  int samples_per_instance = 0;
  std::uint64_t seed = 0;
};

// Permutation-sampling Shapley values. Each sample draws a feature ordering
// and a background row (rows are cycled in reshuffled passes, so every row is
// used equally often up to one pass), then credits each feature with the
// output change when it switches from the background value to the instance
// value. The efficiency residual f(x) - base - sum(phi) is then spread evenly
// over the features. Instance j uses seed DeriveSeed(seed, {j}).
ShapMatrix ShapSample(const BatchModel& model, const Schema& schema,
                      const FeatureMatrix& instances,
                      const FeatureMatrix& background, int samples,
                      std::uint64_t seed);
ShapMatrix ShapSample(const Learner& model, const DataTable& instances,
                      const DataTable& background, int samples,
                      std::uint64_t seed);

// max_j |base + sum_f phi(j, f) - f(x_j)|
double EfficiencyError(const ShapMatrix& shap);

// min(n, max_rows) distinct rows drawn by seed, ascending.
std::vector<std::size_t> SampleBackground(std::size_t n, std::size_t max_rows,
                                          std::uint64_t seed);

struct ImportanceEntry {
  std::string feature;
  double mean_abs_phi = 0.0;
  double share = 0.0;
};

struct ImportanceTable {
  std::vector<ImportanceEntry> entries;  // descending share, ties in schema order
  bool all_zero = false;                 // every phi zero; shares uniform
};

ImportanceTable Importance(const ShapMatrix& shap);

struct PdpGrid {
  std::vector<std::string> features;    // one or two
  std::vector<Eigen::VectorXd> axes;    // strictly increasing
  Eigen::MatrixXd values;               // axes[0] x axes[1] (one column in 1D)
};

// Averaged prediction over all rows of `x` with the chosen feature(s) set to
// each grid point. Axes span [min, max] of the feature in `x`.
PdpGrid Pdp(const BatchModel& model, const Schema& schema,
            const FeatureMatrix& x, const std::vector<std::string>& features,
            const std::vector<int>& resolution);
PdpGrid Pdp(const Learner& model, const DataTable& table,
            const std::vector<std::string>& features,
            const std::vector<int>& resolution);

struct ResidualHist {
  Eigen::VectorXd actual_edges;     // bins + 1
  Eigen::VectorXd predicted_edges;  // bins + 1, same range
  Eigen::MatrixXi counts;           // actual bin x predicted bin
};

// Joint (actual, predicted) histogram over equal-width bins sharing the range
// of both vectors. A zero-width range is widened to [v - 0.5, v + 0.5].
ResidualHist MakeResidualHist(const Eigen::VectorXd& y,
                              const Eigen::VectorXd& yhat, int bins);

void WriteShapCsv(const ShapMatrix& shap, std::ostream& out);
nlohmann::json ShapSummaryJson(const ShapMatrix& shap,
                               const ImportanceTable& importance);
void WriteImportanceCsv(const ImportanceTable& table, std::ostream& out);
void WritePdpCsv(const PdpGrid& grid, std::ostream& out);
void WriteResidualCsv(const ResidualHist& hist, std::ostream& out);

}  // namespace lifefuse

#endif  // LIFEFUSE_INTERPRET_H_
