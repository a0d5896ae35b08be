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

#include "lifefuse/interpret.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>

#include "lifefuse/csv.h"
#include "lifefuse/error.h"
#include "lifefuse/parallel.h"
#include "lifefuse/random.h"

namespace lifefuse {

using nlohmann::json;

namespace {

constexpr int kShapChunk = 64;  // samples evaluated per model call

Eigen::VectorXd Evaluate(const BatchModel& model, const FeatureMatrix& x) {
  Eigen::VectorXd out = model(x);
  if (out.size() != x.rows()) {
    Fail(ErrorCode::kLengthMismatch, "model returned the wrong number of rows");
  }
  return out;
}

void CheckSchema(const Learner& model, const Schema& schema) {
  if (schema != model.schema()) {
    Fail(ErrorCode::kSchemaMismatch, "feature names differ from training");
  }
}

}  // namespace

BatchModel AsBatchModel(const Learner& model) {
  return [&model](const FeatureMatrix& x) { return model.PredictRows(x); };
}

std::vector<std::size_t> SampleBackground(std::size_t n, std::size_t max_rows,
                                          std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (n <= max_rows) return rows;
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(rows));
  rows.resize(max_rows);
  std::sort(rows.begin(), rows.end());
  return rows;
}

ShapMatrix ShapSample(const BatchModel& model, const Schema& schema,
                      const FeatureMatrix& instances,
                      const FeatureMatrix& background, int samples,
                      std::uint64_t seed) {
  if (samples < 1) Fail(ErrorCode::kInvalidArgument, "samples must be >= 1");
  if (background.rows() == 0) Fail(ErrorCode::kEmpty, "empty background set");
  const Eigen::Index f = static_cast<Eigen::Index>(schema.size());
  if (instances.cols() != f || background.cols() != f) {
    Fail(ErrorCode::kSchemaMismatch, "instance and background widths differ");
  }
  ShapMatrix out;
  out.features = schema;
  out.samples_per_instance = samples;
  out.seed = seed;
  out.base_value = Evaluate(model, background).mean();
  out.output = instances.rows() > 0 ? Evaluate(model, instances)
                                    : Eigen::VectorXd(0);
  out.phi = Eigen::MatrixXd::Zero(instances.rows(), f);
  out.instances.resize(instances.rows());
  std::iota(out.instances.begin(), out.instances.end(), std::size_t{0});

  const auto n_bg = static_cast<std::size_t>(background.rows());
  ParallelFor(static_cast<std::size_t>(instances.rows()), [&](std::size_t j) {
    Rng rng(DeriveSeed(seed, {j}));
    std::vector<Eigen::Index> order(f);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::vector<std::size_t> bg_order(n_bg);
    std::iota(bg_order.begin(), bg_order.end(), std::size_t{0});
    std::size_t bg_pos = n_bg;

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(f);
    const Eigen::RowVectorXd x = instances.row(j);
    for (int start = 0; start < samples; start += kShapChunk) {
      const int count = std::min(kShapChunk, samples - start);
      FeatureMatrix z(count * (f + 1), f);
      std::vector<std::vector<Eigen::Index>> orders(count);
      for (int s = 0; s < count; ++s) {
        rng.Shuffle(std::span<Eigen::Index>(order));
        orders[s] = order;
        if (bg_pos == n_bg) {
          rng.Shuffle(std::span<std::size_t>(bg_order));
          bg_pos = 0;
        }
        Eigen::RowVectorXd row = background.row(bg_order[bg_pos++]);
        const Eigen::Index base = s * (f + 1);
        z.row(base) = row;
        for (Eigen::Index k = 0; k < f; ++k) {
          row[order[k]] = x[order[k]];
          z.row(base + k + 1) = row;
        }
      }
      const Eigen::VectorXd v = Evaluate(model, z);
      for (int s = 0; s < count; ++s) {
        const Eigen::Index base = s * (f + 1);
        for (Eigen::Index k = 0; k < f; ++k) {
          phi[orders[s][k]] += v[base + k + 1] - v[base + k];
        }
      }
    }
    phi /= static_cast<double>(samples);
    const double residual = out.output[j] - out.base_value - phi.sum();
    phi.array() += residual / static_cast<double>(f);
    out.phi.row(j) = phi.transpose();
  });
  return out;
}

ShapMatrix ShapSample(const Learner& model, const DataTable& instances,
                      const DataTable& background, int samples,
                      std::uint64_t seed) {
  CheckSchema(model, instances.schema());
  CheckSchema(model, background.schema());
  return ShapSample(AsBatchModel(model), instances.schema(),
                    instances.features(), background.features(), samples, seed);
}

double EfficiencyError(const ShapMatrix& shap) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < shap.phi.rows(); ++j) {
    const double gap =
        std::abs(shap.base_value + shap.phi.row(j).sum() - shap.output[j]);
    worst = std::max(worst, gap);
  }
  return worst;
}

ImportanceTable Importance(const ShapMatrix& shap) {
  if (shap.phi.rows() == 0) Fail(ErrorCode::kEmpty, "no attributions");
  const auto f = static_cast<std::size_t>(shap.phi.cols());
  const Eigen::VectorXd mean_abs =
      shap.phi.cwiseAbs().colwise().mean().transpose();
  const double total = mean_abs.sum();
  ImportanceTable table;
  table.all_zero = !(total > 0.0);
  for (std::size_t i = 0; i < f; ++i) {
    const double share = table.all_zero ? 1.0 / static_cast<double>(f)
                                        : mean_abs[i] / total;
    table.entries.push_back({shap.features[i], mean_abs[i], share});
  }
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto& a, const auto& b) { return a.share > b.share; });
  return table;
}

PdpGrid Pdp(const BatchModel& model, const Schema& schema,
            const FeatureMatrix& x, const std::vector<std::string>& features,
            const std::vector<int>& resolution) {
  if (features.empty() || features.size() > 2) {
    Fail(ErrorCode::kInvalidArgument, "partial dependence takes 1 or 2 features");
  }
  if (resolution.size() != features.size()) {
    Fail(ErrorCode::kInvalidArgument, "one resolution per feature required");
  }
  if (x.rows() == 0) Fail(ErrorCode::kEmptyTable, "partial dependence on no rows");
  PdpGrid grid;
  grid.features = features;
  std::vector<Eigen::Index> columns;
  for (std::size_t a = 0; a < features.size(); ++a) {
    const auto it = std::find(schema.begin(), schema.end(), features[a]);
    if (it == schema.end()) {
      Fail(ErrorCode::kSchemaMismatch, "feature '" + features[a] + "' not in schema");
    }
    if (resolution[a] < 2) {
      Fail(ErrorCode::kInvalidArgument, "resolution must be >= 2");
    }
    const auto col = static_cast<Eigen::Index>(it - schema.begin());
    const double lo = x.col(col).minCoeff();
    const double hi = x.col(col).maxCoeff();
    if (!(hi > lo)) {
      Fail(ErrorCode::kDegenerateFeature,
           "feature '" + features[a] + "' is constant; no grid to span");
    }
    Eigen::VectorXd axis(resolution[a]);
    for (int i = 0; i < resolution[a]; ++i) {
      axis[i] = lo + (hi - lo) * i / (resolution[a] - 1);
    }
    axis[resolution[a] - 1] = hi;
    columns.push_back(col);
    grid.axes.push_back(std::move(axis));
  }
  const Eigen::Index r0 = grid.axes[0].size();
  const Eigen::Index r1 = grid.axes.size() > 1 ? grid.axes[1].size() : 1;
  grid.values.resize(r0, r1);
  ParallelFor(static_cast<std::size_t>(r0 * r1), [&](std::size_t cell) {
    const auto a = static_cast<Eigen::Index>(cell) / r1;
    const auto b = static_cast<Eigen::Index>(cell) % r1;
    FeatureMatrix z = x;
    z.col(columns[0]).setConstant(grid.axes[0][a]);
    if (columns.size() > 1) z.col(columns[1]).setConstant(grid.axes[1][b]);
    grid.values(a, b) = Evaluate(model, z).mean();
  });
  return grid;
}

PdpGrid Pdp(const Learner& model, const DataTable& table,
            const std::vector<std::string>& features,
            const std::vector<int>& resolution) {
  CheckSchema(model, table.schema());
  return Pdp(AsBatchModel(model), table.schema(), table.features(), features,
             resolution);
}

ResidualHist MakeResidualHist(const Eigen::VectorXd& y,
                              const Eigen::VectorXd& yhat, int bins) {
  if (y.size() != yhat.size()) {
    Fail(ErrorCode::kLengthMismatch, "actual and predicted lengths differ");
  }
  if (y.size() == 0) Fail(ErrorCode::kEmpty, "no residuals to bin");
  if (bins < 1) Fail(ErrorCode::kInvalidArgument, "bins must be >= 1");
  double lo = std::min(y.minCoeff(), yhat.minCoeff());
  double hi = std::max(y.maxCoeff(), yhat.maxCoeff());
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  ResidualHist h;
  h.actual_edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.actual_edges[i] = lo + (hi - lo) * i / bins;
  h.actual_edges[bins] = hi;
  h.predicted_edges = h.actual_edges;
  h.counts = Eigen::MatrixXi::Zero(bins, bins);
  auto bin_of = [&](double v) {
    const auto b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    return std::clamp(b, 0, bins - 1);
  };
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    ++h.counts(bin_of(y[i]), bin_of(yhat[i]));
  }
  return h;
}

void WriteShapCsv(const ShapMatrix& shap, std::ostream& out) {
  out << "row_id,feature,phi\n";
  for (Eigen::Index j = 0; j < shap.phi.rows(); ++j) {
    for (Eigen::Index f = 0; f < shap.phi.cols(); ++f) {
      out << shap.instances[j] << ',' << csv::Quote(shap.features[f]) << ','
          << csv::FormatDouble(shap.phi(j, f)) << '\n';
    }
  }
}

json ShapSummaryJson(const ShapMatrix& shap, const ImportanceTable& importance) {
  json ranking = json::array();
  for (const auto& e : importance.entries) {
    ranking.push_back(
        {{"feature", e.feature}, {"mean_abs_phi", e.mean_abs_phi}, {"share", e.share}});
  }
  return {{"base_value", shap.base_value},
          {"instances", shap.phi.rows()},
          {"samples_per_instance", shap.samples_per_instance},
          {"seed", shap.seed},
          {"max_efficiency_error", EfficiencyError(shap)},
          {"all_zero", importance.all_zero},
          {"importance", ranking}};
}

void WriteImportanceCsv(const ImportanceTable& table, std::ostream& out) {
  out << "feature,mean_abs_phi,share\n";
  for (const auto& e : table.entries) {
    out << csv::Quote(e.feature) << ',' << csv::FormatDouble(e.mean_abs_phi)
        << ',' << csv::FormatDouble(e.share) << '\n';
  }
}

void WritePdpCsv(const PdpGrid& grid, std::ostream& out) {
  const bool two_d = grid.axes.size() > 1;
  out << (two_d ? "x1,x2,value\n" : "x1,value\n");
  for (Eigen::Index a = 0; a < grid.values.rows(); ++a) {
    for (Eigen::Index b = 0; b < grid.values.cols(); ++b) {
      out << csv::FormatDouble(grid.axes[0][a]) << ',';
      if (two_d) out << csv::FormatDouble(grid.axes[1][b]) << ',';
      out << csv::FormatDouble(grid.values(a, b)) << '\n';
    }
  }
}

void WriteResidualCsv(const ResidualHist& hist, std::ostream& out) {
  out << "actual_bin_lo,actual_bin_hi,predicted_bin_lo,predicted_bin_hi,count\n";
  for (Eigen::Index a = 0; a < hist.counts.rows(); ++a) {
    for (Eigen::Index p = 0; p < hist.counts.cols(); ++p) {
      out << csv::FormatDouble(hist.actual_edges[a]) << ','
          << csv::FormatDouble(hist.actual_edges[a + 1]) << ','
          << csv::FormatDouble(hist.predicted_edges[p]) << ','
          << csv::FormatDouble(hist.predicted_edges[p + 1]) << ','
          << hist.counts(a, p) << '\n';
    }
  }
}

}  // namespace lifefuse
