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

#ifndef LIFEFUSE_LEARNER_H_
#define LIFEFUSE_LEARNER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lifefuse/data.h"

namespace lifefuse {

inline constexpr int kModelFormatVersion = 1;

// Uniform fit/predict contract. Fit turns an untrained instance into a trained
// one; afterwards Predict is deterministic and const.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string_view kind() const = 0;
  // {"kind": ..., "params": {...}}
  virtual nlohmann::json Descriptor() const = 0;

  void Fit(const DataTable& table);

  // One prediction per row. Sequence learners use the table's preceding
  // cycles of each cell as context. Throws NotFitted or SchemaMismatch.
  Eigen::VectorXd Predict(const DataTable& table) const;

  // Context-free evaluation of feature vectors, one per row of `x` (columns in
  // training-schema order). This is what model-agnostic explainers call.
  Eigen::VectorXd PredictRows(const FeatureMatrix& x) const;

  bool fitted() const { return fitted_; }
  const Schema& schema() const { return schema_; }

  // Versioned model document: format, version, kind, params, schema, state.
  nlohmann::json ToJson() const;

 protected:
  virtual void DoFit(const DataTable& table) = 0;
  virtual Eigen::VectorXd DoPredict(const DataTable& table) const {
    return DoPredictRows(table.features());
  }
  virtual Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const = 0;
  virtual nlohmann::json StateJson() const = 0;
  virtual void LoadState(const nlohmann::json& state) = 0;

  // For learners assembled from already-trained parts.
  void MarkFitted(Schema schema) {
    schema_ = std::move(schema);
    fitted_ = true;
  }

 private:
  friend std::unique_ptr<Learner> LoadModel(const nlohmann::json& doc);
  void CheckReady(std::size_t width) const;

  bool fitted_ = false;
  Schema schema_;
};

// ---------------------------------------------------------------------------
// Hyperparameters

struct RidgeParams {
  double lambda = 1.0;
  bool fit_intercept = true;
};

struct GbtParams {
  int n_trees = 200;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 2;
  double subsample = 1.0;
  std::uint64_t seed = 0;
};

struct LstmParams {
  int window = 8;
  int hidden = 16;
  int epochs = 40;
  int batch = 32;
  double step_size = 1e-3;
  std::uint64_t seed = 0;
  double grad_clip = 5.0;
};

struct KnnParams {
  int k = 5;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 12;
  int features_per_split = 0;  // 0: ceil(F / 3)
  int min_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct MlpParams {
  std::vector<int> hidden = {32, 16};
  int epochs = 300;
  int batch = 32;
  double step_size = 1e-3;
  std::uint64_t seed = 0;
  double grad_clip = 5.0;
};

// Predicts the training mean.
struct MeanParams {};

class LearnerSpec;

struct StackedParams {
  std::vector<LearnerSpec> bases;
  int folds = 5;
  Grouping grouping = Grouping::kByRow;
  double meta_lambda = 1e-3;
  std::uint64_t seed = 0;
};

// Escape hatch for learners defined outside the library (tests, plugins).
// Not serializable.
struct CustomSpec {
  std::string kind;
  std::function<std::unique_ptr<Learner>(std::uint64_t seed)> factory;
  std::uint64_t seed = 0;
};

// Value-type description of an untrained learner.
class LearnerSpec {
 public:
  using Params = std::variant<RidgeParams, GbtParams, LstmParams, KnnParams,
                              ForestParams, MlpParams, MeanParams,
                              StackedParams, CustomSpec>;

  LearnerSpec(Params params) : params_(std::move(params)) {}  // NOLINT

  const Params& params() const { return params_; }
  std::string kind() const;

  // Same spec with its seed replaced (no-op for unseeded kinds). Stacked specs
  // reseed only the ensemble seed; base seeds are derived from it at fit time.
  LearnerSpec WithSeed(std::uint64_t seed) const;

  std::unique_ptr<Learner> Make() const;

  // {"kind": ..., "params": {...}}; missing params take defaults.
  static LearnerSpec FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;

 private:
  Params params_;
};

// Default base roster of the stacked ensemble: ridge, gbt, lstm.
std::vector<LearnerSpec> DefaultStackBases();

std::unique_ptr<Learner> LoadModel(const nlohmann::json& doc);

// Helpers for the model documents.
nlohmann::json VectorToJson(const Eigen::VectorXd& v);
Eigen::VectorXd VectorFromJson(const nlohmann::json& j);

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNER_H_
