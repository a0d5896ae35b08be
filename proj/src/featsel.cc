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

#include "lifefuse/featsel.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include "lifefuse/csv.h"
#include "lifefuse/parallel.h"

namespace lifefuse {
namespace {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
double GaussKronrod(const F& f, double a, double b, double* error) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXk[static_cast<std::size_t>(j)];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kWk[static_cast<std::size_t>(j)] * sum;
    if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * sum;
  }
  *error = std::abs((kronrod - gauss) * h);
  return kronrod * h;
}

template <typename F>
double AdaptiveIntegrate(const F& f, double a, double b, double tol,
                         int depth) {
  double err = 0.0;
  const double whole = GaussKronrod(f, a, b, &err);
  if (err <= tol || depth <= 0) return whole;
  const double m = 0.5 * (a + b);
  return AdaptiveIntegrate(f, a, m, 0.5 * tol, depth - 1) +
         AdaptiveIntegrate(f, m, b, 0.5 * tol, depth - 1);
}

double StudentTDensity(double t, double dof) {
  const double log_norm = std::lgamma(0.5 * (dof + 1.0)) -
                          std::lgamma(0.5 * dof) -
                          0.5 * std::log(dof * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (dof + 1.0) * std::log1p(t * t / dof));
}

// Integral of the density over [0, |t|].
double HalfMass(double t, double dof) {
  const double a = std::abs(t);
  if (a == 0.0) return 0.0;
  auto f = [dof](double s) { return StudentTDensity(s, dof); };
  return AdaptiveIntegrate(f, 0.0, a, 1e-14, 50);
}

}  // namespace

double StudentTCdf(double t, double dof) {
  if (!(dof > 0.0)) Fail(ErrorCode::kInvalidArgument, "dof must be > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double half = std::min(0.5, HalfMass(t, dof));
  return t >= 0 ? 0.5 + half : 0.5 - half;
}

double StudentTTwoSidedP(double t, double dof) {
  if (!(dof > 0.0)) Fail(ErrorCode::kInvalidArgument, "dof must be > 0");
  if (std::isinf(t)) return 0.0;
  return std::clamp(1.0 - 2.0 * HalfMass(t, dof), 0.0, 1.0);
}

double CorrelationPValue(double r, std::size_t n) {
  const double a = std::abs(r);
  if (a >= 1.0) return 0.0;
  if (n < 3) return 1.0;
  const double dof = static_cast<double>(n - 2);
  const double t = r * std::sqrt(dof) / std::sqrt(1.0 - r * r);
  return StudentTTwoSidedP(t, dof);
}

CorrelationReport CorrelationMatrix(const DataTable& table) {
  if (table.rows() < 2) {
    Fail(ErrorCode::kEmptyTable, "correlation needs at least 2 rows");
  }
  const auto& x = table.features();
  const auto f = static_cast<Eigen::Index>(table.num_features());
  for (Eigen::Index j = 0; j < f; ++j) {
    if (x.col(j).maxCoeff() == x.col(j).minCoeff()) {
      Fail(ErrorCode::kConstantInput,
           "feature " + table.schema()[static_cast<std::size_t>(j)] +
               " is constant");
    }
  }
  CorrelationReport report;
  report.features = table.schema();
  report.n = table.rows();
  report.r = Eigen::MatrixXd::Identity(f, f);
  report.p = Eigen::MatrixXd::Zero(f, f);

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < f; ++i) {
    for (Eigen::Index j = i + 1; j < f; ++j) pairs.emplace_back(i, j);
  }
  ParallelFor(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double r = Pearson(x.col(i), x.col(j));
    const double p = CorrelationPValue(r, report.n);
    report.r(i, j) = report.r(j, i) = r;
    report.p(i, j) = report.p(j, i) = p;
  });
  return report;
}

PruneResult PruneMulticollinear(const CorrelationReport& report,
                                double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "threshold must lie in (0, 1]");
  }
  const auto f = static_cast<std::size_t>(report.r.rows());
  std::vector<std::size_t> retained(f);
  for (std::size_t i = 0; i < f; ++i) retained[i] = i;
  const Eigen::MatrixXd abs_r = report.r.cwiseAbs();
  auto at = [&](std::size_t i, std::size_t j) {
    return abs_r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  auto mean_abs = [&](std::size_t i) {
    double sum = 0.0;
    for (auto j : retained) {
      if (j != i) sum += at(i, j);
    }
    return sum / static_cast<double>(retained.size() - 1);
  };

  PruneResult result;
  while (retained.size() > 1) {
    double worst = -1.0;
    std::size_t wa = 0, wb = 0;
    for (std::size_t a = 0; a < retained.size(); ++a) {
      for (std::size_t b = a + 1; b < retained.size(); ++b) {
        const double v = at(retained[a], retained[b]);
        if (v > worst) {
          worst = v;
          wa = retained[a];
          wb = retained[b];
        }
      }
    }
    if (worst < threshold) break;
    const double ma = mean_abs(wa);
    const double mb = mean_abs(wb);
    // wa precedes wb in schema order, so a tie drops wb.
    const std::size_t drop = ma > mb ? wa : wb;
    const std::size_t keep = drop == wa ? wb : wa;
    result.dropped.push_back(
        {report.features[drop], report.features[keep], worst});
    retained.erase(std::find(retained.begin(), retained.end(), drop));
  }
  for (auto i : retained) result.retained.push_back(report.features[i]);
  return result;
}

void WriteHeatmap(const CorrelationReport& report, std::ostream& out) {
  out << "feature_a,feature_b,r,p\n";
  const auto f = static_cast<Eigen::Index>(report.features.size());
  for (Eigen::Index i = 0; i < f; ++i) {
    for (Eigen::Index j = 0; j < f; ++j) {
      out << csv::Quote(report.features[static_cast<std::size_t>(i)]) << ','
          << csv::Quote(report.features[static_cast<std::size_t>(j)]) << ','
          << csv::FormatDouble(report.r(i, j)) << ','
          << csv::FormatDouble(report.p(i, j)) << '\n';
    }
  }
}

void ExportHeatmap(const CorrelationReport& report,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  WriteHeatmap(report, out);
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

CorrelationReport ReadHeatmap(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kEmptyTable, "empty heatmap");
  struct Cell {
    std::string a, b;
    double r, p;
  };
  std::vector<Cell> cells;
  Schema order;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::SplitLine(line);
    if (fields.size() != 4) {
      Fail(ErrorCode::kInvalidArgument, "malformed heatmap row: " + line);
    }
    const auto r = csv::ParseDouble(fields[2]);
    const auto p = csv::ParseDouble(fields[3]);
    if (!r || !p) Fail(ErrorCode::kInvalidArgument, "bad number: " + line);
    if (std::find(order.begin(), order.end(), fields[0]) == order.end()) {
      order.push_back(fields[0]);
    }
    cells.push_back({fields[0], fields[1], *r, *p});
  }
  const auto f = static_cast<Eigen::Index>(order.size());
  if (cells.size() != order.size() * order.size()) {
    Fail(ErrorCode::kInvalidArgument, "heatmap is not a full square matrix");
  }
  std::map<std::string, Eigen::Index> index;
  for (Eigen::Index i = 0; i < f; ++i) {
    index[order[static_cast<std::size_t>(i)]] = i;
  }
  CorrelationReport report;
  report.features = order;
  report.r.resize(f, f);
  report.p.resize(f, f);
  for (const auto& c : cells) {
    report.r(index.at(c.a), index.at(c.b)) = c.r;
    report.p(index.at(c.a), index.at(c.b)) = c.p;
  }
  return report;
}

nlohmann::json PruneToJson(const PruneResult& result, double threshold) {
  nlohmann::json dropped = nlohmann::json::array();
  for (const auto& d : result.dropped) {
    dropped.push_back({{"feature", d.feature}, {"peer", d.peer},
                       {"abs_r", d.abs_r}});
  }
  return {{"threshold", threshold},
          {"retained", result.retained},
          {"dropped", dropped}};
}

}  // namespace lifefuse
