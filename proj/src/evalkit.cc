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

#include "lifefuse/evalkit.h"

#include <cmath>
#include <ostream>

#include "lifefuse/csv.h"
#include "lifefuse/error.h"
#include "lifefuse/parallel.h"
#include "lifefuse/random.h"

namespace lifefuse {

using nlohmann::json;

FoldMetrics Score(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  return {Mae(y, yhat), Rmse(y, yhat), R2(y, yhat)};
}

namespace {

MetricSummary Summarize(const std::vector<double>& v) {
  MetricSummary s;
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

void Summarize(ModelReport& m) {
  std::vector<double> mae, rmse, r2;
  for (const auto& f : m.folds) {
    mae.push_back(f.mae);
    rmse.push_back(f.rmse);
    r2.push_back(f.r2);
  }
  m.mae = Summarize(mae);
  m.rmse = Summarize(rmse);
  m.r2 = Summarize(r2);
}

FoldMetrics EvaluateFold(const LearnerSpec& spec, const DataTable& table,
                         const Fold& fold) {
  auto model = spec.Make();
  model->Fit(table.Select(fold.train));
  const Eigen::VectorXd all = model->Predict(table);
  Eigen::VectorXd y(fold.validation.size());
  Eigen::VectorXd yhat(fold.validation.size());
  for (std::size_t v = 0; v < fold.validation.size(); ++v) {
    y[v] = table.target()[fold.validation[v]];
    yhat[v] = all[fold.validation[v]];
  }
  return Score(y, yhat);
}

EvalReport Evaluate(const std::vector<NamedSpec>& models,
                    const DataTable& table, const SplitSpec& split) {
  const auto folds = MakeFolds(table, split);
  const std::size_t n_models = models.size();
  const std::size_t n_folds = folds.size();

  std::vector<FoldMetrics> slots(n_models * n_folds);
  ParallelFor(n_models * n_folds, [&](std::size_t task) {
    const std::size_t m = task / n_folds;
    const std::size_t k = task % n_folds;
    try {
      slots[task] = EvaluateFold(
          models[m].spec.WithSeed(DeriveSeed(split.seed, {m, k})), table,
          folds[k]);
    } catch (const Error& e) {
      throw e.WithContext("model " + models[m].name + ", fold " +
                          std::to_string(k));
    }
  });

  EvalReport report;
  report.rows = table.rows();
  report.fold_count = static_cast<int>(n_folds);
  report.seed = split.seed;
  report.grouping = split.grouping;
  for (std::size_t m = 0; m < n_models; ++m) {
    ModelReport mr;
    mr.name = models[m].name;
    mr.folds.assign(slots.begin() + m * n_folds,
                    slots.begin() + (m + 1) * n_folds);
    Summarize(mr);
    report.models.push_back(std::move(mr));
  }
  return report;
}

}  // namespace

EvalReport CompareModels(const std::vector<NamedSpec>& models,
                         const DataTable& table, const SplitSpec& split) {
  if (models.size() < 2) {
    Fail(ErrorCode::kInvalidArgument, "comparison needs at least 2 models");
  }
  return Evaluate(models, table, split);
}

EvalReport CrossValidate(const NamedSpec& model, const DataTable& table,
                         const SplitSpec& split) {
  return Evaluate({model}, table, split);
}

FoldMetrics Holdout(const LearnerSpec& spec, const DataTable& train,
                    const DataTable& test) {
  auto model = spec.Make();
  model->Fit(train);
  return Score(test.target(), model->Predict(test));
}

std::size_t BestModel(const EvalReport& report) {
  if (report.models.empty()) Fail(ErrorCode::kEmpty, "empty report");
  std::size_t best = 0;
  for (std::size_t m = 1; m < report.models.size(); ++m) {
    if (report.models[m].r2.mean > report.models[best].r2.mean) best = m;
  }
  return best;
}

std::vector<Improvement> Improvements(const EvalReport& report) {
  const std::size_t b = BestModel(report);
  const ModelReport& best = report.models[b];
  std::vector<Improvement> out;
  for (std::size_t m = 0; m < report.models.size(); ++m) {
    if (m == b) continue;
    const ModelReport& other = report.models[m];
    out.push_back({best.name, other.name,
                   R2ImprovementPct(best.r2.mean, other.r2.mean),
                   ErrorReductionPct(best.mae.mean, other.mae.mean),
                   ErrorReductionPct(best.rmse.mean, other.rmse.mean)});
  }
  return out;
}

json ReportToJson(const EvalReport& report) {
  json models = json::array();
  for (const auto& m : report.models) {
    json folds = json::array();
    for (const auto& f : m.folds) {
      folds.push_back({{"mae", f.mae}, {"rmse", f.rmse}, {"r2", f.r2}});
    }
    auto summary = [](const MetricSummary& s) {
      return json{{"mean", s.mean}, {"std", s.stddev}};
    };
    models.push_back({{"name", m.name},
                      {"folds", folds},
                      {"mae", summary(m.mae)},
                      {"rmse", summary(m.rmse)},
                      {"r2", summary(m.r2)}});
  }
  return {{"rows", report.rows},
          {"folds", report.fold_count},
          {"seed", report.seed},
          {"grouping", GroupingName(report.grouping)},
          {"models", models}};
}

void WriteFoldsCsv(const EvalReport& report, std::ostream& out) {
  out << "model,fold,mae,rmse,r2\n";
  for (const auto& m : report.models) {
    for (std::size_t k = 0; k < m.folds.size(); ++k) {
      out << csv::Quote(m.name) << ',' << k << ','
          << csv::FormatDouble(m.folds[k].mae) << ','
          << csv::FormatDouble(m.folds[k].rmse) << ','
          << csv::FormatDouble(m.folds[k].r2) << '\n';
    }
  }
}

void WriteImprovementsCsv(const std::vector<Improvement>& rows,
                          std::ostream& out) {
  out << "best,other,d_r2_pct,d_mae_pct,d_rmse_pct\n";
  for (const auto& r : rows) {
    out << csv::Quote(r.best) << ',' << csv::Quote(r.other) << ','
        << csv::FormatDouble(r.d_r2_pct) << ','
        << csv::FormatDouble(r.d_mae_pct) << ','
        << csv::FormatDouble(r.d_rmse_pct) << '\n';
  }
}

}  // namespace lifefuse
