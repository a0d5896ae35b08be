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

#ifndef LIFEFUSE_ENSEMBLE_H_
#define LIFEFUSE_ENSEMBLE_H_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lifefuse/data.h"
#include "lifefuse/learner.h"
#include "lifefuse/learners/ridge.h"

namespace lifefuse {

// Dynamic fusion weights. For base model i
//   raw_i  = max(r2_i, 0) / (1 + var_i)
//   norm_i = raw_i / sum(raw)          (1/B each when sum(raw) = 0)
// where r2_i is the cross-validated R^2 and var_i the population variance of
// its out-of-fold predictions.
struct FusionWeights {
  std::vector<std::string> names;
  Eigen::VectorXd r2_cv;
  Eigen::VectorXd pred_var;
  Eigen::VectorXd raw;
  Eigen::VectorXd normalized;
  bool uniform_fallback = false;
};

FusionWeights ComputeWeights(const Eigen::VectorXd& r2,
                             const Eigen::VectorXd& variance);

void WriteWeightsCsv(const FusionWeights& weights, std::ostream& out);
nlohmann::json WeightsToJson(const FusionWeights& weights);
FusionWeights WeightsFromJson(const nlohmann::json& j);

struct OofResult {
  Eigen::MatrixXd predictions;  // n x B; entry (j, i) from the fold holding j out
  Eigen::VectorXd r2;
  Eigen::VectorXd variance;
  std::vector<Fold> folds;
  std::vector<int> fold_of_row;
};

// Base i in fold k is trained with seed DeriveSeed(split.seed, {i, k}).
// Learner errors are rethrown tagged with the model and fold.
OofResult GenerateOof(const std::vector<LearnerSpec>& bases,
                      const DataTable& table, const SplitSpec& split);

struct StackedPrediction {
  Eigen::VectorXd values;
  // Rows whose sequence-model input was mean-filled (no full window).
  std::vector<bool> sequence_filled;
};

// Two-level model: base learners, fusion weights applied as column scalings
// of the base predictions, and a ridge meta-model on the scaled columns.
class StackedModel : public Learner {
 public:
  explicit StackedModel(StackedParams params = {});

  // Builds an already-trained model from parts.
  static std::unique_ptr<StackedModel> Assemble(
      StackedParams params, Schema schema,
      std::vector<std::unique_ptr<Learner>> bases, FusionWeights weights,
      RidgeSolution meta);

  std::string_view kind() const override { return "stacked"; }
  nlohmann::json Descriptor() const override;

  const StackedParams& params() const { return params_; }
  const FusionWeights& weights() const { return weights_; }
  const RidgeSolution& meta() const { return meta_; }
  const std::vector<std::unique_ptr<Learner>>& bases() const { return bases_; }

  StackedPrediction PredictDetailed(const DataTable& table) const;

 protected:
  void DoFit(const DataTable& table) override;
  Eigen::VectorXd DoPredict(const DataTable& table) const override;
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override;
  nlohmann::json StateJson() const override;
  void LoadState(const nlohmann::json& state) override;

 private:
  Eigen::VectorXd Fuse(const Eigen::MatrixXd& base_predictions) const;

  StackedParams params_;
  std::vector<std::unique_ptr<Learner>> bases_;
  FusionWeights weights_;
  RidgeSolution meta_;
};

// OOF predictions and weights, meta ridge on the weight-scaled OOF columns,
// then every base refit on the full table.
std::unique_ptr<StackedModel> FitStacked(const std::vector<LearnerSpec>& bases,
                                         const DataTable& table,
                                         const SplitSpec& split,
                                         double meta_lambda);

StackedPrediction StackedPredict(const StackedModel& model,
                                 const DataTable& table);

}  // namespace lifefuse

#endif  // LIFEFUSE_ENSEMBLE_H_
