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

#ifndef LIFEFUSE_EVALKIT_H_
#define LIFEFUSE_EVALKIT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lifefuse/data.h"
#include "lifefuse/learner.h"
#include "lifefuse/metrics.h"

namespace lifefuse {

struct FoldMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
};

FoldMetrics Score(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev over folds
};

struct ModelReport {
  std::string name;
  std::vector<FoldMetrics> folds;
  MetricSummary mae;
  MetricSummary rmse;
  MetricSummary r2;
};

struct EvalReport {
  std::vector<ModelReport> models;
  std::size_t rows = 0;
  int fold_count = 0;
  std::uint64_t seed = 0;
  Grouping grouping = Grouping::kByRow;
};

struct NamedSpec {
  std::string name;
  LearnerSpec spec;
};

// K-fold evaluation. Model m in fold k trains with seed
// DeriveSeed(split.seed, {m, k}) on the fold's training rows and is scored on
// its validation rows (sequence learners see the preceding cycles as context).
EvalReport CrossValidate(const NamedSpec& model, const DataTable& table,
                         const SplitSpec& split);

// Every model is evaluated on the same partitions.
EvalReport CompareModels(const std::vector<NamedSpec>& models,
                         const DataTable& table, const SplitSpec& split);

// Fits on `train`, scores on `test`.
FoldMetrics Holdout(const LearnerSpec& spec, const DataTable& train,
                    const DataTable& test);

struct Improvement {
  std::string best;
  std::string other;
  double d_r2_pct = 0.0;
  double d_mae_pct = 0.0;
  double d_rmse_pct = 0.0;
};

// Index of the model with the highest mean R^2 (first on ties).
std::size_t BestModel(const EvalReport& report);

// Gains of the best model over every other one, from fold means.
std::vector<Improvement> Improvements(const EvalReport& report);

nlohmann::json ReportToJson(const EvalReport& report);
void WriteFoldsCsv(const EvalReport& report, std::ostream& out);
void WriteImprovementsCsv(const std::vector<Improvement>& rows,
                          std::ostream& out);

}  // namespace lifefuse

#endif  // LIFEFUSE_EVALKIT_H_
