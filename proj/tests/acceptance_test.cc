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

// Acceptance harness: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lifefuse/data.h"
#include "lifefuse/ensemble.h"
#include "lifefuse/evalkit.h"
#include "lifefuse/featsel.h"
#include "lifefuse/interpret.h"
#include "lifefuse/learners/gbt.h"
#include "lifefuse/learners/lstm.h"
#include "lifefuse/learners/ridge.h"
#include "lifefuse/metrics.h"
#include "lifefuse/parallel.h"
#include "lifefuse/pipeline.h"
#include "lifefuse/random.h"
#include "lifefuse/tune.h"
#include "oracle.h"
#include "test_util.h"

namespace lifefuse {
namespace {

using nlohmann::json;
using testutil::Names;
using testutil::RandomMatrix;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Clock {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <typename... Args>
std::string Fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

BatchModel RowWise(std::function<double(const Eigen::RowVectorXd&)> f) {
  return [f](const FeatureMatrix& x) {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = f(x.row(i));
    return out;
  };
}

// ---------------------------------------------------------------------------

Outcome MetricOracle() {
  const Clock clock;
  Rng rng(1001);
  double worst_abs = 0, worst_rel = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + static_cast<int>(rng.UniformIndex(99));
    Eigen::VectorXd y(n), p(n);
    for (int i = 0; i < n; ++i) {
      y[i] = rng.Normal();
      p[i] = y[i] + rng.Uniform(0.0, 2.0) * rng.Normal();
    }
    const oracle::Vec ys(y.data(), y.data() + n), ps(p.data(), p.data() + n);
    worst_abs = std::max({worst_abs, std::abs(Mae(y, p) - oracle::Mae(ys, ps)),
                          std::abs(Rmse(y, p) - oracle::Rmse(ys, ps))});
    const double r2 = oracle::R2(ys, ps);
    // Absolute below |R2| = 1, relative beyond it (R2 is unbounded below).
    worst_rel = std::max(worst_rel, std::abs(R2(y, p) - r2) / std::max(1.0, std::abs(r2)));
  }
  const bool examples = Mae(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, -1)) == 1.0 &&
                        Rmse(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, -1)) == 1.0 &&
                        Rmse(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 2)) == std::sqrt(2.0) &&
                        R2(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 4)) == 0.5;
  const double secs = clock.Seconds();
  return {worst_abs <= 1e-12 && worst_rel <= 1e-12 && examples && secs < 1.0,
          Fmt("mae/rmse max err %.2e, r2 max scaled err %.2e (1e-12), worked examples %s, %.3f s",
              worst_abs, worst_rel, examples ? "exact" : "WRONG", secs)};
}

Outcome ImprovementFormula() {
  const Clock clock;
  const double r2 = R2ImprovementPct(0.9839, 0.6731);
  const double rmse = ErrorReductionPct(0.0092, 0.0548);
  const double mae = ErrorReductionPct(0.0058, 0.0284);
  const double secs = clock.Seconds();
  const bool ok = std::abs(r2 - 46.2) <= 0.1 && std::abs(rmse - 83.2) <= 0.1 &&
                  std::abs(mae - 79.6) <= 0.1 && secs < 1.0;
  return {ok, Fmt("dR2 %.3f%% (46.2), dRMSE %.3f%% (83.2), dMAE %.3f%% (79.6), %.3f s", r2, rmse,
                  mae, secs)};
}

Outcome Weighting() {
  const Clock clock;
  Rng rng(1003);
  double worst_sum = 0;
  bool bounded = true;
  for (int t = 0; t < 10000; ++t) {
    const int b = 1 + static_cast<int>(rng.UniformIndex(8));
    Eigen::VectorXd r2(b), var(b);
    for (int i = 0; i < b; ++i) {
      const double u = rng.Uniform(0.0, 1.0);
      r2[i] = u < 0.15 ? 0.0 : rng.Uniform(-1.0, 1.0);
      var[i] = u > 0.85 ? 0.0 : rng.Uniform(0.0, 10.0);
    }
    const FusionWeights w = ComputeWeights(r2, var);
    worst_sum = std::max(worst_sum, std::abs(w.normalized.sum() - 1.0));
    bounded = bounded && w.normalized.minCoeff() >= 0.0 && w.normalized.maxCoeff() <= 1.0;
  }
  const FusionWeights hand = ComputeWeights(Eigen::Vector2d(0.9, 0.5), Eigen::Vector2d(0.0, 1.0));
  const bool pair = std::abs(hand.normalized[0] - 0.78261) <= 1e-5 &&
                    std::abs(hand.normalized[1] - 0.21739) <= 1e-5;
  const double secs = clock.Seconds();
  return {worst_sum <= 1e-12 && bounded && pair && secs < 1.0,
          Fmt("max |sum-1| %.2e (1e-12), hand pair (%.6f, %.6f), %.3f s", worst_sum,
              hand.normalized[0], hand.normalized[1], secs)};
}

Outcome RidgeOracle() {
  Rng rng(1004);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const int f = 1 + static_cast<int>(rng.UniformIndex(8));
    const int n = f + 2 + static_cast<int>(rng.UniformIndex(29 - f));
    const Eigen::MatrixXd x = RandomMatrix(n, f, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.Normal() * 3.0;
    const double lambda = t % 5 == 0 ? 0.0 : rng.Uniform(0.0, 5.0);
    oracle::Mat xm(n, oracle::Vec(f));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < f; ++j) xm[i][j] = x(i, j);
    const auto [beta, icpt] = oracle::Ridge(xm, oracle::Vec(y.data(), y.data() + n), lambda);
    const RidgeSolution s = RidgeSolve(x, y, lambda);
    for (int j = 0; j < f; ++j) worst = std::max(worst, std::abs(s.coef[j] - beta[j]));
    worst = std::max(worst, std::abs(s.intercept - icpt));
  }
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const RidgeSolution exact = RidgeSolve(x, Eigen::Vector3d(2, 4, 6), 0.0);
  const double recovery = std::max(std::abs(exact.coef[0] - 2.0), std::abs(exact.intercept));
  return {worst <= 1e-8 && recovery <= 1e-10,
          Fmt("max coefficient err %.2e (1e-8), exact recovery err %.2e (1e-10)", worst, recovery)};
}

Outcome GbtExactFit() {
  const Clock clock;
  Rng rng(1005);
  double worst_ulps = 0;
  bool monotone = true;
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + static_cast<int>(rng.UniformIndex(31));
    const int f = 1 + static_cast<int>(rng.UniformIndex(5));
    const Eigen::MatrixXd x = RandomMatrix(n, f, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.Uniform(0.0, 10.0);
    const DataTable table = testutil::MakeTable(x, y);
    GbtParams exact;
    exact.n_trees = 1;
    exact.max_depth = 64;
    exact.learning_rate = 1.0;
    exact.min_leaf = 1;
    GbtRegressor g(exact);
    g.Fit(table);
    // Residuals in units of double spacing at the table's target magnitude
    // (predictions are base score + leaf); exact arithmetic would give 0.
    const double top = y.cwiseAbs().maxCoeff();
    const double ulp = std::nextafter(top, INFINITY) - top;
    worst_ulps = std::max(worst_ulps, (g.Predict(table) - y).cwiseAbs().maxCoeff() / ulp);

    GbtParams boosted;
    boosted.n_trees = 50;
    boosted.max_depth = 1 + static_cast<int>(rng.UniformIndex(4));
    boosted.min_leaf = 1;
    GbtRegressor b(boosted);
    b.Fit(table);
    const auto& loss = b.training_loss();
    for (std::size_t k = 1; k < loss.size(); ++k) monotone = monotone && loss[k] <= loss[k - 1];
  }
  const double secs = clock.Seconds();
  return {worst_ulps <= 4.0 && monotone && secs < 10.0,
          Fmt("max training residual %.1f ulp (zero up to rounding, 4 ulp), loss nonincreasing %s, "
              "%.3f s",
              worst_ulps, monotone ? "yes" : "NO", secs)};
}

Outcome LstmGradient() {
  const Clock clock;
  Rng rng(1006);
  LstmNetwork net(3, 5);
  net.InitUniform(rng);
  net.parameters() *= 3.0;
  SequenceBatch batch;
  for (int t = 0; t < 6; ++t) batch.steps.push_back(RandomMatrix(3, 2, rng));
  const Eigen::Vector2d target(0.4, -0.7);
  Eigen::VectorXd grad;
  net.LossAndGradient(batch, target, &grad);
  const double h = 1e-5;
  double worst = 0;
  for (Eigen::Index k = 0; k < grad.size(); ++k) {
    LstmNetwork probe = net;
    probe.parameters()[k] += h;
    const double up = probe.Loss(batch, target);
    probe.parameters()[k] -= 2 * h;
    const double fd = (up - probe.Loss(batch, target)) / (2 * h);
    // Relative to the larger magnitude, floored so exactly-zero entries compare absolutely.
    worst = std::max(worst, std::abs(fd - grad[k]) / std::max({std::abs(fd), std::abs(grad[k]), 1e-6}));
  }
  const double secs = clock.Seconds();
  return {worst < 1e-4 && secs < 10.0,
          Fmt("max relative err %.2e over %.0f parameters (1e-4), %.3f s", worst,
              static_cast<double>(grad.size()), secs)};
}

Outcome ShapleySuite() {
  const Clock clock;
  // Efficiency on a trained nonlinear model.
  SynthConfig cfg;
  cfg.cells = 2;
  cfg.cycles_per_cell = 100;
  const DataTable t = Standardize(SynthGenerate(cfg).table);
  GbtParams gp;
  gp.n_trees = 60;
  GbtRegressor g(gp);
  g.Fit(t);
  const auto inst = SampleBackground(t.rows(), 50, 1);
  const auto bg = SampleBackground(t.rows(), 128, 2);
  const double efficiency = EfficiencyError(ShapSample(g, t.Select(inst), t.Select(bg), 200, 3));

  Rng rng(1007);
  // Linear closed form, background = the dataset itself, instances drawn from it.
  const FeatureMatrix data = RandomMatrix(500, 2, rng);
  const FeatureMatrix linst = data.topRows(30);
  const BatchModel linear = RowWise([](const Eigen::RowVectorXd& x) { return 3 * x[0] + 1.5; });
  const ShapMatrix lin = ShapSample(linear, Names(2), linst, data, 2000, 4);
  const double mu = data.col(0).mean();
  double lin_err = 0;
  for (Eigen::Index j = 0; j < linst.rows(); ++j) {
    const double exact = 3 * (linst(j, 0) - mu);
    lin_err = std::max(lin_err, std::abs(lin.phi(j, 0) - exact) / std::abs(exact));
    lin_err = std::max(lin_err, std::abs(lin.phi(j, 1)) / std::abs(lin.phi(j, 0)));
  }
  // Diagnostic only: a 128-row background that 2000 samples do not cover evenly.
  const FeatureMatrix sub = data.bottomRows(128);
  const ShapMatrix uneven = ShapSample(linear, Names(2), linst, sub, 2000, 4);
  double uneven_err = 0, uneven_scale = 0;
  for (Eigen::Index j = 0; j < linst.rows(); ++j) {
    const double exact = 3 * (linst(j, 0) - sub.col(0).mean());
    uneven_err = std::max(uneven_err, std::abs(uneven.phi(j, 0) - exact));
    uneven_scale = std::max(uneven_scale, std::abs(exact));
  }
  // Dummy.
  const ShapMatrix dummy = ShapSample(
      RowWise([](const Eigen::RowVectorXd& x) { return std::sin(2 * x[0]) + x[1] * x[1] + x[0] * x[1]; }),
      Names(3), RandomMatrix(40, 3, rng), RandomMatrix(128, 3, rng), 2000, 5);
  const ImportanceTable imp = Importance(dummy);
  double dummy_share = 0, top_share = 0;
  for (const auto& e : imp.entries) {
    top_share = std::max(top_share, e.share);
    if (e.feature == "f2") dummy_share = e.share;
  }
  // Symmetry.
  FeatureMatrix sbg = RandomMatrix(128, 3, rng), sinst = RandomMatrix(40, 3, rng);
  sbg.col(1) = sbg.col(0);
  sinst.col(1) = sinst.col(0);
  const ShapMatrix sym = ShapSample(RowWise([](const Eigen::RowVectorXd& x) {
                                      return x[0] * x[1] + std::sin(x[0]) + std::sin(x[1]) + 0.3 * x[2];
                                    }),
                                    Names(3), sinst, sbg, 2000, 6);
  const double a = sym.phi.col(0).cwiseAbs().mean(), b = sym.phi.col(1).cwiseAbs().mean();
  const double asym = std::abs(a - b) / std::max(a, b);
  const double secs = clock.Seconds();
  const bool ok = efficiency <= 1e-9 && lin_err <= 0.02 && dummy_share < 0.01 * top_share &&
                  asym <= 0.05 && secs < 60.0;
  return {ok, Fmt("efficiency %.2e (1e-9), linear rel err %.4f (0.02), dummy/top %.5f (0.01), "
                  "symmetry gap %.4f (0.05), %.2f s [128-row background: max err %.4f of "
                  "largest attribution]",
                  efficiency, lin_err, dummy_share / top_share, asym, secs,
                  uneven_err / uneven_scale)};
}

Outcome PdpSuite() {
  Rng rng(1008);
  const FeatureMatrix x = RandomMatrix(50, 3, rng);
  const PdpGrid one =
      Pdp(RowWise([](const Eigen::RowVectorXd& r) { return 2 * r[0] + r[1]; }), Names(3), x, {"f0"}, {25});
  double lin = 0;
  for (Eigen::Index i = 0; i < one.axes[0].size(); ++i) {
    lin = std::max(lin, std::abs(one.values(i, 0) - (2 * one.axes[0][i] + x.col(1).mean())));
  }
  const BatchModel add = RowWise(
      [](const Eigen::RowVectorXd& r) { return std::sin(3 * r[0]) + r[1] * r[1] + std::exp(r[2]); });
  const PdpGrid both = Pdp(add, Names(3), x, {"f0", "f1"}, {9, 11});
  const PdpGrid a = Pdp(add, Names(3), x, {"f0"}, {9});
  const PdpGrid b = Pdp(add, Names(3), x, {"f1"}, {11});
  const double c = both.values(0, 0) - a.values(0, 0) - b.values(0, 0);
  double additive = 0;
  for (int i = 0; i < 9; ++i) {
    for (int k = 0; k < 11; ++k) {
      additive = std::max(additive, std::abs(both.values(i, k) - a.values(i, 0) - b.values(k, 0) - c));
    }
  }
  return {lin <= 1e-9 && additive <= 1e-9,
          Fmt("1D linear err %.2e (1e-9), 2D additive err %.2e (1e-9)", lin, additive)};
}

// ---------------------------------------------------------------------------
// End-to-end runs shared by criteria 9 and 10.

struct CompareRun {
  EvalReport report;
  std::string bytes;
  double seconds = 0;
};

CompareRun RunCompare(int threads) {
  SetNumThreads(threads);
  const Clock clock;
  const RunConfig c = RunConfig::FromJson(json::object());
  std::vector<NamedSpec> specs;
  for (const auto& name : c.roster) specs.push_back({name, c.ModelSpec(name)});
  const Prepared p = Preprocess(LoadDataset(c.data).table, c.features);
  CompareRun run;
  run.report = CompareModels(specs, p.table, c.FoldSplit());
  std::ostringstream out;
  out << ReportToJson(run.report).dump(2) << '\n';
  WriteFoldsCsv(run.report, out);
  WriteImprovementsCsv(Improvements(run.report), out);
  run.bytes = out.str();
  run.seconds = clock.Seconds();
  SetNumThreads(1);
  return run;
}

Outcome EndToEnd(const CompareRun& first, const CompareRun& second) {
  double se = 0, best_base = -1e300, best_stack_base = -1e300;
  std::string best_name;
  for (const auto& m : first.report.models) {
    if (m.name == "se") {
      se = m.r2.mean;
    } else {
      if (m.r2.mean > best_base) {
        best_base = m.r2.mean;
        best_name = m.name;
      }
      if (m.name == "ridge" || m.name == "gbt" || m.name == "lstm") {
        best_stack_base = std::max(best_stack_base, m.r2.mean);
      }
    }
  }
  const bool ok = first.report.models.size() == 7 && se >= best_base - 0.01 &&
                  first.bytes == second.bytes && first.seconds < 300.0;
  return {ok, Fmt("se r2 %.6f vs best other (%s) %.6f, best stack base %.6f (margin 0.01), "
                  "%zu models, reruns identical %s, %.1f s",
                  se, best_name.c_str(), best_base, best_stack_base, first.report.models.size(),
                  first.bytes == second.bytes ? "yes" : "no", first.seconds)};
}

// Serialized output of every seeded stage.
std::vector<std::pair<std::string, std::string>> SeededStages(int threads) {
  SetNumThreads(threads);
  std::vector<std::pair<std::string, std::string>> out;
  const auto add = [&](const std::string& name, const std::function<void(std::ostream&)>& write) {
    std::ostringstream s;
    write(s);
    out.emplace_back(name, s.str());
  };
  SynthConfig cfg;
  cfg.cells = 4;
  cfg.cycles_per_cell = 60;
  const DataTable raw = SynthGenerate(cfg).table;
  add("synth", [&](std::ostream& s) { WriteCsv(raw, s); });
  const Prepared p = Preprocess(raw, FeatureSettings{});
  add("preprocess", [&](std::ostream& s) {
    WriteCsv(p.table, s);
    WriteHeatmap(p.correlation, s);
  });
  const SplitSpec split{0.25, 5, 3, Grouping::kByCell};
  const TrainTest tt = Split(p.table, split);
  add("split", [&](std::ostream& s) {
    WriteCsv(tt.train, s);
    WriteCsv(tt.test, s);
    for (const auto& f : MakeFolds(p.table, SplitSpec{0.25, 5, 3})) {
      for (auto r : f.train) s << r << ' ';
      s << '\n';
    }
  });
  for (const auto& name : DefaultRoster()) {
    RunConfig c = RunConfig::FromJson(json::object());
    LearnerSpec spec = c.ModelSpec(name);
    if (name == "se") {
      StackedParams sp = std::get<StackedParams>(spec.params());
      sp.folds = 3;
      spec = LearnerSpec(sp);
    }
    const auto model = spec.WithSeed(21).Make();
    model->Fit(tt.train);
    add("fit " + name, [&](std::ostream& s) {
      s << model->ToJson().dump() << '\n';
      s << VectorToJson(model->Predict(tt.test)).dump();
    });
    if (name == "gbt") {
      const ShapMatrix shap = ShapSample(*model, tt.test.Select(SampleBackground(tt.test.rows(), 20, 4)),
                                         tt.train.Select(SampleBackground(tt.train.rows(), 64, 5)), 100, 6);
      add("shap", [&](std::ostream& s) {
        WriteShapCsv(shap, s);
        WriteImportanceCsv(Importance(shap), s);
      });
      add("pdp", [&](std::ostream& s) {
        WritePdpCsv(Pdp(*model, tt.test, {p.table.schema()[0], p.table.schema()[1]}, {6, 6}), s);
      });
    }
  }
  const OofResult oof = GenerateOof(DefaultStackBases(), tt.train, SplitSpec{0.25, 3, 8});
  add("oof", [&](std::ostream& s) {
    WriteWeightsCsv(ComputeWeights(oof.r2, oof.variance), s);
    s << VectorToJson(Eigen::Map<const Eigen::VectorXd>(oof.predictions.data(), oof.predictions.size()))
             .dump();
  });
  const SearchSpace space = SearchSpace::FromJson(json::parse(R"({
    "family": "gbt", "base": {"n_trees": 20, "subsample": 0.8},
    "params": {"max_depth": {"type": "int", "low": 1, "high": 5},
               "learning_rate": {"type": "real", "low": 0.01, "high": 1.0}}})"));
  const SearchResult sr = RandomSearch(space, tt.train, SplitSpec{0.25, 3, 9}, 5, 10);
  add("tune", [&](std::ostream& s) {
    WriteTrialsCsv(sr.trials, s);
    s << BestToJson(space, sr.best).dump();
  });
  SetNumThreads(1);
  return out;
}

Outcome DeterminismSweep(const CompareRun& serial, const CompareRun& parallel) {
  const auto a = SeededStages(1);
  const auto b = SeededStages(1);
  const auto c = SeededStages(8);
  std::string mismatched;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].second != b[i].second || a[i].second != c[i].second) mismatched += " " + a[i].first;
  }
  if (serial.bytes != parallel.bytes) mismatched += " compare";
  const bool ok = mismatched.empty() && a.size() == c.size();
  return {ok, std::to_string(a.size() + 1) + " stages byte-identical across reruns and threads 1/8" +
                  (ok ? "" : "; mismatched:" + mismatched)};
}

}  // namespace
}  // namespace lifefuse

int main() {
  using lifefuse::Outcome;
  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  report(1, "metric oracle", lifefuse::MetricOracle);
  report(2, "improvement formula", lifefuse::ImprovementFormula);
  report(3, "fusion weighting", lifefuse::Weighting);
  report(4, "ridge oracle", lifefuse::RidgeOracle);
  report(5, "gbt exact fit", lifefuse::GbtExactFit);
  report(6, "lstm gradient", lifefuse::LstmGradient);
  report(7, "shapley suite", lifefuse::ShapleySuite);
  report(8, "pdp suite", lifefuse::PdpSuite);
  lifefuse::CompareRun serial, parallel;
  bool ran = true;
  try {
    serial = lifefuse::RunCompare(1);
    parallel = lifefuse::RunCompare(8);
  } catch (const std::exception& e) {
    ran = false;
    std::printf("compare run failed: %s\n", e.what());
  }
  report(9, "end-to-end synthetic", [&] {
    return ran ? lifefuse::EndToEnd(serial, parallel) : Outcome{false, "compare did not run"};
  });
  report(10, "determinism sweep", [&] {
    return ran ? lifefuse::DeterminismSweep(serial, parallel) : Outcome{false, "compare did not run"};
  });
  return failures == 0 ? 0 : 1;
}
