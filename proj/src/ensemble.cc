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

#include "lifefuse/ensemble.h"

#include <ostream>
#include <set>

#include "lifefuse/csv.h"
#include "lifefuse/error.h"
#include "lifefuse/learners/lstm.h"
#include "lifefuse/metrics.h"
#include "lifefuse/parallel.h"
#include "lifefuse/random.h"

namespace lifefuse {

using nlohmann::json;

FusionWeights ComputeWeights(const Eigen::VectorXd& r2,
                             const Eigen::VectorXd& variance) {
  if (r2.size() != variance.size()) {
    Fail(ErrorCode::kLengthMismatch, "weights need one variance per model");
  }
  if (r2.size() == 0) Fail(ErrorCode::kEmpty, "no models to weight");
  if (!(variance.array() >= 0.0).all()) {
    Fail(ErrorCode::kInvalidArgument, "prediction variances must be >= 0");
  }
  FusionWeights w;
  w.r2_cv = r2;
  w.pred_var = variance;
  w.raw.resize(r2.size());
  for (Eigen::Index i = 0; i < r2.size(); ++i) {
    const double r = r2[i] > 0.0 ? r2[i] : 0.0;  // NaN counts as no skill
    w.raw[i] = r / (1.0 + variance[i]);
  }
  const double total = w.raw.sum();
  if (total > 0.0) {
    w.normalized = w.raw / total;
  } else {
    w.uniform_fallback = true;
    w.normalized = Eigen::VectorXd::Constant(r2.size(), 1.0 / r2.size());
  }
  w.names.resize(r2.size());
  for (Eigen::Index i = 0; i < r2.size(); ++i) {
    w.names[i] = "model_" + std::to_string(i);
  }
  return w;
}

void WriteWeightsCsv(const FusionWeights& w, std::ostream& out) {
  out << "model,r2_cv,pred_var,raw_w,norm_w\n";
  for (Eigen::Index i = 0; i < w.normalized.size(); ++i) {
    out << csv::Quote(w.names[i]) << ',' << csv::FormatDouble(w.r2_cv[i])
        << ',' << csv::FormatDouble(w.pred_var[i]) << ','
        << csv::FormatDouble(w.raw[i]) << ','
        << csv::FormatDouble(w.normalized[i]) << '\n';
  }
}

json WeightsToJson(const FusionWeights& w) {
  return {{"names", w.names},
          {"r2_cv", VectorToJson(w.r2_cv)},
          {"pred_var", VectorToJson(w.pred_var)},
          {"raw", VectorToJson(w.raw)},
          {"normalized", VectorToJson(w.normalized)},
          {"uniform_fallback", w.uniform_fallback}};
}

FusionWeights WeightsFromJson(const json& j) {
  FusionWeights w;
  w.names = j.at("names").get<std::vector<std::string>>();
  w.r2_cv = VectorFromJson(j.at("r2_cv"));
  w.pred_var = VectorFromJson(j.at("pred_var"));
  w.raw = VectorFromJson(j.at("raw"));
  w.normalized = VectorFromJson(j.at("normalized"));
  w.uniform_fallback = j.at("uniform_fallback").get<bool>();
  const auto b = static_cast<Eigen::Index>(w.names.size());
  if (w.r2_cv.size() != b || w.pred_var.size() != b || w.raw.size() != b ||
      w.normalized.size() != b) {
    Fail(ErrorCode::kInvalidConfig, "fusion weight arrays differ in length");
  }
  return w;
}

namespace {

// Base kinds, suffixed with their position when a kind repeats.
std::vector<std::string> BaseNames(const std::vector<LearnerSpec>& bases) {
  std::vector<std::string> names;
  std::multiset<std::string> kinds;
  for (const auto& b : bases) kinds.insert(b.kind());
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto kind = bases[i].kind();
    names.push_back(kinds.count(kind) > 1 ? kind + "_" + std::to_string(i)
                                          : kind);
  }
  return names;
}

}  // namespace

OofResult GenerateOof(const std::vector<LearnerSpec>& bases,
                      const DataTable& table, const SplitSpec& split) {
  if (bases.empty()) Fail(ErrorCode::kInvalidArgument, "no base learners");
  OofResult out;
  out.folds = MakeFolds(table, split);
  const std::size_t n_bases = bases.size();
  const std::size_t n_folds = out.folds.size();
  const auto names = BaseNames(bases);

  out.fold_of_row.assign(table.rows(), -1);
  for (std::size_t k = 0; k < n_folds; ++k) {
    for (std::size_t j : out.folds[k].validation) {
      out.fold_of_row[j] = static_cast<int>(k);
    }
  }

  std::vector<Eigen::VectorXd> slots(n_bases * n_folds);
  ParallelFor(n_bases * n_folds, [&](std::size_t task) {
    const std::size_t i = task / n_folds;
    const std::size_t k = task % n_folds;
    const Fold& fold = out.folds[k];
    try {
      auto model = bases[i].WithSeed(DeriveSeed(split.seed, {i, k})).Make();
      model->Fit(table.Select(fold.train));
      // The full table gives sequence learners the real preceding cycles of
      // held-out rows; only features are read for those rows.
      const Eigen::VectorXd all = model->Predict(table);
      Eigen::VectorXd held(fold.validation.size());
      for (std::size_t v = 0; v < fold.validation.size(); ++v) {
        held[v] = all[fold.validation[v]];
      }
      slots[task] = std::move(held);
    } catch (const Error& e) {
      throw e.WithContext("model " + names[i] + ", fold " + std::to_string(k));
    }
  });

  out.predictions.resize(table.rows(), n_bases);
  for (std::size_t i = 0; i < n_bases; ++i) {
    for (std::size_t k = 0; k < n_folds; ++k) {
      const auto& held = slots[i * n_folds + k];
      for (std::size_t v = 0; v < out.folds[k].validation.size(); ++v) {
        out.predictions(out.folds[k].validation[v], i) = held[v];
      }
    }
  }
  out.r2.resize(n_bases);
  out.variance.resize(n_bases);
  for (std::size_t i = 0; i < n_bases; ++i) {
    out.r2[i] = R2(table.target(), out.predictions.col(i));
    out.variance[i] = Variance(out.predictions.col(i));
  }
  return out;
}

StackedModel::StackedModel(StackedParams params) : params_(std::move(params)) {}

std::unique_ptr<StackedModel> StackedModel::Assemble(
    StackedParams params, Schema schema,
    std::vector<std::unique_ptr<Learner>> bases, FusionWeights weights,
    RidgeSolution meta) {
  const auto b = static_cast<Eigen::Index>(bases.size());
  if (b == 0 || weights.normalized.size() != b || meta.coef.size() != b) {
    Fail(ErrorCode::kLengthMismatch,
         "stacked parts disagree on the number of bases");
  }
  for (const auto& base : bases) {
    if (!base || !base->fitted() || base->schema() != schema) {
      Fail(ErrorCode::kSchemaMismatch, "stacked bases must be fitted on schema");
    }
  }
  auto model = std::make_unique<StackedModel>(std::move(params));
  model->bases_ = std::move(bases);
  model->weights_ = std::move(weights);
  model->meta_ = std::move(meta);
  model->MarkFitted(std::move(schema));
  return model;
}

json StackedModel::Descriptor() const {
  json params = json::object();
  try {
    params = LearnerSpec(params_).ToJson().at("params");
  } catch (const Error&) {
    // Custom bases have no parameter document.
  }
  return {{"kind", "stacked"}, {"params", params}};
}

void StackedModel::DoFit(const DataTable& table) {
  SplitSpec split;
  split.fold_count = params_.folds;
  split.seed = params_.seed;
  split.grouping = params_.grouping;

  const OofResult oof = GenerateOof(params_.bases, table, split);
  FusionWeights weights = ComputeWeights(oof.r2, oof.variance);
  weights.names = BaseNames(params_.bases);

  const Eigen::MatrixXd scaled =
      oof.predictions * weights.normalized.asDiagonal();
  RidgeSolution meta = RidgeSolve(scaled, table.target(), params_.meta_lambda);

  const std::size_t n_bases = params_.bases.size();
  const auto refit_index = static_cast<std::uint64_t>(oof.folds.size());
  std::vector<std::unique_ptr<Learner>> bases(n_bases);
  ParallelFor(n_bases, [&](std::size_t i) {
    try {
      auto model =
          params_.bases[i].WithSeed(DeriveSeed(params_.seed, {i, refit_index}))
              .Make();
      model->Fit(table);
      bases[i] = std::move(model);
    } catch (const Error& e) {
      throw e.WithContext("model " + weights.names[i] + ", full refit");
    }
  });

  bases_ = std::move(bases);
  weights_ = std::move(weights);
  meta_ = std::move(meta);
}

Eigen::VectorXd StackedModel::Fuse(const Eigen::MatrixXd& base_predictions) const {
  Eigen::VectorXd out =
      (base_predictions * weights_.normalized.asDiagonal()) * meta_.coef;
  out.array() += meta_.intercept;
  return out;
}

StackedPrediction StackedModel::PredictDetailed(const DataTable& table) const {
  const std::size_t n_bases = bases_.size();
  Eigen::MatrixXd columns(table.rows(), n_bases);
  std::vector<std::vector<bool>> covered(n_bases);
  ParallelFor(n_bases, [&](std::size_t i) {
    if (const auto* lstm = dynamic_cast<const LstmRegressor*>(bases_[i].get())) {
      auto p = lstm->PredictWithCoverage(table);
      columns.col(i) = p.values;
      covered[i] = std::move(p.covered);
    } else {
      columns.col(i) = bases_[i]->Predict(table);
    }
  });
  StackedPrediction out;
  out.values = Fuse(columns);
  out.sequence_filled.assign(table.rows(), false);
  for (const auto& c : covered) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (!c[j]) out.sequence_filled[j] = true;
    }
  }
  return out;
}

Eigen::VectorXd StackedModel::DoPredict(const DataTable& table) const {
  return PredictDetailed(table).values;
}

Eigen::VectorXd StackedModel::DoPredictRows(const FeatureMatrix& x) const {
  Eigen::MatrixXd columns(x.rows(), bases_.size());
  for (std::size_t i = 0; i < bases_.size(); ++i) {
    columns.col(i) = bases_[i]->PredictRows(x);
  }
  return Fuse(columns);
}

json StackedModel::StateJson() const {
  json bases = json::array();
  for (const auto& b : bases_) bases.push_back(b->ToJson());
  return {{"bases", bases},
          {"weights", WeightsToJson(weights_)},
          {"meta", {{"coef", VectorToJson(meta_.coef)},
                    {"intercept", meta_.intercept}}}};
}

void StackedModel::LoadState(const json& state) {
  bases_.clear();
  for (const auto& doc : state.at("bases")) bases_.push_back(LoadModel(doc));
  weights_ = WeightsFromJson(state.at("weights"));
  meta_.coef = VectorFromJson(state.at("meta").at("coef"));
  meta_.intercept = state.at("meta").at("intercept").get<double>();
  const auto b = static_cast<Eigen::Index>(bases_.size());
  if (weights_.normalized.size() != b || meta_.coef.size() != b) {
    Fail(ErrorCode::kInvalidConfig, "stacked state sizes disagree");
  }
}

std::unique_ptr<StackedModel> FitStacked(const std::vector<LearnerSpec>& bases,
                                         const DataTable& table,
                                         const SplitSpec& split,
                                         double meta_lambda) {
  StackedParams params;
  params.bases = bases;
  params.folds = split.fold_count;
  params.grouping = split.grouping;
  params.meta_lambda = meta_lambda;
  params.seed = split.seed;
  auto model = LearnerSpec(params).Make();
  model->Fit(table);
  return std::unique_ptr<StackedModel>(static_cast<StackedModel*>(model.release()));
}

StackedPrediction StackedPredict(const StackedModel& model,
                                 const DataTable& table) {
  if (!model.fitted()) Fail(ErrorCode::kNotFitted, "stacked model used before fit");
  if (table.schema() != model.schema()) {
    Fail(ErrorCode::kSchemaMismatch, "feature names differ from training");
  }
  return model.PredictDetailed(table);
}

}  // namespace lifefuse
