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

#include "lifefuse/learner.h"

#include <type_traits>

#include "lifefuse/ensemble.h"
#include "lifefuse/error.h"
#include "lifefuse/learners/forest.h"
#include "lifefuse/learners/gbt.h"
#include "lifefuse/learners/knn.h"
#include "lifefuse/learners/lstm.h"
#include "lifefuse/learners/mlp.h"
#include "lifefuse/learners/ridge.h"

namespace lifefuse {

using nlohmann::json;

void Learner::Fit(const DataTable& table) {
  if (table.empty()) Fail(ErrorCode::kEmptyTable, "cannot fit on zero rows");
  if (table.num_features() == 0) {
    Fail(ErrorCode::kInvalidArgument, "cannot fit without features");
  }
  fitted_ = false;
  DoFit(table);
  schema_ = table.schema();
  fitted_ = true;
}

void Learner::CheckReady(std::size_t width) const {
  if (!fitted_) {
    Fail(ErrorCode::kNotFitted,
         std::string(kind()) + " model used before fit");
  }
  if (width != schema_.size()) {
    Fail(ErrorCode::kSchemaMismatch,
         "expected " + std::to_string(schema_.size()) + " features, got " +
             std::to_string(width));
  }
}

Eigen::VectorXd Learner::Predict(const DataTable& table) const {
  CheckReady(table.num_features());
  if (table.schema() != schema_) {
    Fail(ErrorCode::kSchemaMismatch, "feature names differ from training");
  }
  if (table.empty()) return Eigen::VectorXd(0);
  return DoPredict(table);
}

Eigen::VectorXd Learner::PredictRows(const FeatureMatrix& x) const {
  CheckReady(static_cast<std::size_t>(x.cols()));
  if (x.rows() == 0) return Eigen::VectorXd(0);
  return DoPredictRows(x);
}

json Learner::ToJson() const {
  if (!fitted_) Fail(ErrorCode::kNotFitted, "cannot serialize unfitted model");
  const json desc = Descriptor();
  return json{{"format", "lifefuse.model"},
              {"version", kModelFormatVersion},
              {"kind", desc.at("kind")},
              {"params", desc.at("params")},
              {"schema", schema_},
              {"state", StateJson()}};
}

std::unique_ptr<Learner> LoadModel(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "lifefuse.model") {
      Fail(ErrorCode::kInvalidConfig, "not a lifefuse model document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      Fail(ErrorCode::kInvalidConfig,
           "unsupported model version " + std::to_string(version));
    }
    auto model =
        LearnerSpec::FromJson({{"kind", doc.at("kind")}, {"params", doc.at("params")}})
            .Make();
    model->LoadState(doc.at("state"));
    model->schema_ = doc.at("schema").get<Schema>();
    model->fitted_ = true;
    return model;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, std::string("malformed model: ") + e.what());
  }
}

json VectorToJson(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd VectorFromJson(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

// ---------------------------------------------------------------------------
// Parameter documents

namespace {

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void Require(bool ok, const std::string& what) {
  if (!ok) Fail(ErrorCode::kInvalidConfig, what);
}

json ParamsToJson(const RidgeParams& p) {
  return {{"lambda", p.lambda}, {"fit_intercept", p.fit_intercept}};
}
json ParamsToJson(const GbtParams& p) {
  return {{"n_trees", p.n_trees},     {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate}, {"min_leaf", p.min_leaf},
          {"subsample", p.subsample}, {"seed", p.seed}};
}
json ParamsToJson(const LstmParams& p) {
  return {{"window", p.window}, {"hidden", p.hidden},
          {"epochs", p.epochs}, {"batch", p.batch},
          {"step_size", p.step_size}, {"seed", p.seed},
          {"grad_clip", p.grad_clip}};
}
json ParamsToJson(const KnnParams& p) { return {{"k", p.k}}; }
json ParamsToJson(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth},
          {"features_per_split", p.features_per_split},
          {"min_leaf", p.min_leaf},
          {"bootstrap", p.bootstrap},
          {"seed", p.seed}};
}
json ParamsToJson(const MlpParams& p) {
  return {{"hidden", p.hidden}, {"epochs", p.epochs},
          {"batch", p.batch},   {"step_size", p.step_size},
          {"seed", p.seed},     {"grad_clip", p.grad_clip}};
}
json ParamsToJson(const MeanParams&) { return json::object(); }
json ParamsToJson(const StackedParams& p) {
  json bases = json::array();
  for (const auto& b : p.bases) bases.push_back(b.ToJson());
  return {{"bases", bases},
          {"folds", p.folds},
          {"grouping", GroupingName(p.grouping)},
          {"meta_lambda", p.meta_lambda},
          {"seed", p.seed}};
}
json ParamsToJson(const CustomSpec& p) {
  Fail(ErrorCode::kInvalidArgument,
       "custom learner '" + p.kind + "' is not serializable");
}

void Validate(const RidgeParams& p) {
  Require(p.lambda >= 0.0 && std::isfinite(p.lambda),
          "ridge lambda must be finite and >= 0");
}
void Validate(const GbtParams& p) {
  Require(p.n_trees >= 0, "gbt n_trees must be >= 0");
  Require(p.max_depth >= 1, "gbt max_depth must be >= 1");
  Require(p.learning_rate > 0.0 && p.learning_rate <= 1.0,
          "gbt learning_rate must lie in (0, 1]");
  Require(p.min_leaf >= 1, "gbt min_leaf must be >= 1");
  Require(p.subsample > 0.0 && p.subsample <= 1.0,
          "gbt subsample must lie in (0, 1]");
}
void Validate(const LstmParams& p) {
  Require(p.window >= 1, "lstm window must be >= 1");
  Require(p.hidden >= 1, "lstm hidden must be >= 1");
  Require(p.epochs >= 1, "lstm epochs must be >= 1");
  Require(p.batch >= 1, "lstm batch must be >= 1");
  Require(p.step_size > 0.0, "lstm step_size must be > 0");
  Require(p.grad_clip > 0.0, "lstm grad_clip must be > 0");
}
void Validate(const KnnParams& p) { Require(p.k >= 1, "knn k must be >= 1"); }
void Validate(const ForestParams& p) {
  Require(p.n_trees >= 1, "rf n_trees must be >= 1");
  Require(p.max_depth >= 1, "rf max_depth must be >= 1");
  Require(p.features_per_split >= 0, "rf features_per_split must be >= 0");
  Require(p.min_leaf >= 1, "rf min_leaf must be >= 1");
}
void Validate(const MlpParams& p) {
  for (int w : p.hidden) Require(w >= 1, "mlp layer widths must be >= 1");
  Require(p.epochs >= 1, "mlp epochs must be >= 1");
  Require(p.batch >= 1, "mlp batch must be >= 1");
  Require(p.step_size > 0.0, "mlp step_size must be > 0");
  Require(p.grad_clip > 0.0, "mlp grad_clip must be > 0");
}
void Validate(const MeanParams&) {}
void Validate(const StackedParams& p) {
  Require(p.bases.size() >= 2, "stacked ensemble needs at least 2 bases");
  Require(p.folds >= 2, "stacked folds must be >= 2");
  Require(p.meta_lambda >= 0.0, "stacked meta_lambda must be >= 0");
}
void Validate(const CustomSpec& p) {
  Require(static_cast<bool>(p.factory), "custom learner without factory");
}

}  // namespace

std::string LearnerSpec::kind() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RidgeParams>) return "ridge";
        if constexpr (std::is_same_v<T, GbtParams>) return "gbt";
        if constexpr (std::is_same_v<T, LstmParams>) return "lstm";
        if constexpr (std::is_same_v<T, KnnParams>) return "knn";
        if constexpr (std::is_same_v<T, ForestParams>) return "rf";
        if constexpr (std::is_same_v<T, MlpParams>) return "mlp";
        if constexpr (std::is_same_v<T, MeanParams>) return "mean";
        if constexpr (std::is_same_v<T, StackedParams>) return "stacked";
        if constexpr (std::is_same_v<T, CustomSpec>) return p.kind;
      },
      params_);
}

LearnerSpec LearnerSpec::WithSeed(std::uint64_t seed) const {
  LearnerSpec out = *this;
  std::visit(
      [seed](auto& p) {
        if constexpr (requires { p.seed; }) p.seed = seed;
      },
      out.params_);
  return out;
}

std::unique_ptr<Learner> LearnerSpec::Make() const {
  return std::visit(
      [](const auto& p) -> std::unique_ptr<Learner> {
        Validate(p);
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RidgeParams>) {
          return std::make_unique<RidgeRegressor>(p);
        } else if constexpr (std::is_same_v<T, GbtParams>) {
          return std::make_unique<GbtRegressor>(p);
        } else if constexpr (std::is_same_v<T, LstmParams>) {
          return std::make_unique<LstmRegressor>(p);
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          return std::make_unique<KnnRegressor>(p);
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          return std::make_unique<RandomForestRegressor>(p);
        } else if constexpr (std::is_same_v<T, MlpParams>) {
          return std::make_unique<MlpRegressor>(p);
        } else if constexpr (std::is_same_v<T, MeanParams>) {
          return std::make_unique<MeanRegressor>();
        } else if constexpr (std::is_same_v<T, StackedParams>) {
          return std::make_unique<StackedModel>(p);
        } else {
          return p.factory(p.seed);
        }
      },
      params_);
}

json LearnerSpec::ToJson() const {
  return {{"kind", kind()},
          {"params", std::visit([](const auto& p) { return ParamsToJson(p); },
                                params_)}};
}

LearnerSpec LearnerSpec::FromJson(const json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    const json params = j.value("params", json::object());
    if (kind == "ridge") {
      RidgeParams p;
      Read(params, "lambda", p.lambda);
      Read(params, "fit_intercept", p.fit_intercept);
      Validate(p);
      return LearnerSpec(p);
    }
    if (kind == "gbt") {
      GbtParams p;
      Read(params, "n_trees", p.n_trees);
      Read(params, "max_depth", p.max_depth);
      Read(params, "learning_rate", p.learning_rate);
      Read(params, "min_leaf", p.min_leaf);
      Read(params, "subsample", p.subsample);
      Read(params, "seed", p.seed);
      Validate(p);
      return LearnerSpec(p);
    }
    if (kind == "lstm") {
      LstmParams p;
      Read(params, "window", p.window);
      Read(params, "hidden", p.hidden);
      Read(params, "epochs", p.epochs);
      Read(params, "batch", p.batch);
      Read(params, "step_size", p.step_size);
      Read(params, "seed", p.seed);
      Read(params, "grad_clip", p.grad_clip);
      Validate(p);
      return LearnerSpec(p);
    }
    if (kind == "knn") {
      KnnParams p;
      Read(params, "k", p.k);
      Validate(p);
      return LearnerSpec(p);
    }
    if (kind == "rf") {
      ForestParams p;
      Read(params, "n_trees", p.n_trees);
      Read(params, "max_depth", p.max_depth);
      Read(params, "features_per_split", p.features_per_split);
      Read(params, "min_leaf", p.min_leaf);
      Read(params, "bootstrap", p.bootstrap);
      Read(params, "seed", p.seed);
      Validate(p);
      return LearnerSpec(p);
    }
    if (kind == "mlp") {
      MlpParams p;
      Read(params, "hidden", p.hidden);
      Read(params, "epochs", p.epochs);
      Read(params, "batch", p.batch);
      Read(params, "step_size", p.step_size);
      Read(params, "seed", p.seed);
      Read(params, "grad_clip", p.grad_clip);
      Validate(p);
      return LearnerSpec(p);
    }
    if (kind == "mean") return LearnerSpec(MeanParams{});
    if (kind == "stacked" || kind == "se") {
      StackedParams p;
      if (params.contains("bases")) {
        for (const auto& b : params.at("bases")) {
          p.bases.push_back(FromJson(b));
        }
      } else {
        p.bases = DefaultStackBases();
      }
      Read(params, "folds", p.folds);
      if (params.contains("grouping")) {
        const auto g = ParseGrouping(params.at("grouping").get<std::string>());
        Require(g.has_value(), "grouping must be 'row' or 'cell'");
        p.grouping = *g;
      }
      Read(params, "meta_lambda", p.meta_lambda);
      Read(params, "seed", p.seed);
      Validate(p);
      return LearnerSpec(p);
    }
    Fail(ErrorCode::kInvalidConfig, "unknown learner kind '" + kind + "'");
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, std::string("learner spec: ") + e.what());
  }
}

std::vector<LearnerSpec> DefaultStackBases() {
  return {LearnerSpec(RidgeParams{}), LearnerSpec(GbtParams{}),
          LearnerSpec(LstmParams{})};
}

}  // namespace lifefuse
