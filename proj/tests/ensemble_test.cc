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

#include <cmath>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fake_learners.h"
#include "lifefuse/ensemble.h"
#include "lifefuse/error.h"
#include "lifefuse/learners/ridge.h"
#include "lifefuse/metrics.h"
#include "lifefuse/random.h"
#include "test_util.h"

namespace lifefuse {
namespace {

using testutil::FnSpec;
using testutil::LinearTable;

double Linear(const Eigen::RowVectorXd& x) { return 50.0 + 2.0 * x[0] - x[1] + 0.5 * x[2]; }

// Deterministic pseudo-noise keyed on the row's features.
double Noise(const Eigen::RowVectorXd& x) {
  return 50.0 + 10.0 * std::sin(977.0 * x[0] + 313.0 * x[1]);
}

DataTable Noiseless(int n, std::uint64_t seed) {
  return LinearTable(n, Eigen::Vector3d(2, -1, 0.5), 50, 0.0, seed);
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kNumericalFailure;
}

// ---------------------------------------------------------------------------
// Weights

TEST(WeightsTest, SingleModelTakesAll) {
  const FusionWeights w = ComputeWeights(Eigen::VectorXd::Constant(1, 0.7),
                                         Eigen::VectorXd::Constant(1, 0.3));
  EXPECT_DOUBLE_EQ(w.normalized[0], 1.0);
  EXPECT_FALSE(w.uniform_fallback);
}

TEST(WeightsTest, HandEvaluatedPair) {
  const FusionWeights w = ComputeWeights(Eigen::Vector2d(0.9, 0.5), Eigen::Vector2d(0.0, 1.0));
  EXPECT_NEAR(w.raw[0], 0.9, 1e-15);
  EXPECT_NEAR(w.raw[1], 0.25, 1e-15);
  // 0.9 / 1.15 and 0.25 / 1.15
  EXPECT_NEAR(w.normalized[0], 18.0 / 23.0, 1e-12);
  EXPECT_NEAR(w.normalized[1], 5.0 / 23.0, 1e-12);
  EXPECT_NEAR(w.normalized[0], 0.78260869, 1e-8);
  EXPECT_NEAR(w.normalized[1], 0.21739130, 1e-8);
}

TEST(WeightsTest, NegativeR2IsClamped) {
  const FusionWeights w = ComputeWeights(Eigen::Vector2d(-0.2, 0.5), Eigen::Vector2d(0, 0));
  EXPECT_EQ(w.raw[0], 0.0);
  EXPECT_DOUBLE_EQ(w.normalized[0], 0.0);
  EXPECT_DOUBLE_EQ(w.normalized[1], 1.0);
}

TEST(WeightsTest, AllNonPositiveFallsBackToUniform) {
  const FusionWeights w =
      ComputeWeights(Eigen::Vector3d(-1, 0, -0.5), Eigen::Vector3d(1, 2, 3));
  EXPECT_TRUE(w.uniform_fallback);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(w.normalized[i], 1.0 / 3.0);
}

TEST(WeightsTest, Errors) {
  EXPECT_EQ(CodeOf([] { ComputeWeights(Eigen::Vector2d(1, 1), Eigen::Vector3d(1, 1, 1)); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(CodeOf([] { ComputeWeights(Eigen::VectorXd(), Eigen::VectorXd()); }),
            ErrorCode::kEmpty);
  EXPECT_EQ(CodeOf([] { ComputeWeights(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, -1)); }),
            ErrorCode::kInvalidArgument);
}

TEST(WeightsTest, ConvexOnRandomInputs) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int b = 1 + static_cast<int>(rng.UniformIndex(6));
    Eigen::VectorXd r2(b), var(b);
    for (int i = 0; i < b; ++i) {
      const double u = rng.Uniform(0.0, 1.0);
      r2[i] = u < 0.2 ? 0.0 : rng.Uniform(-1.0, 1.0);
      var[i] = u > 0.8 ? 0.0 : rng.Uniform(0.0, 5.0);
    }
    const FusionWeights w = ComputeWeights(r2, var);
    EXPECT_NEAR(w.normalized.sum(), 1.0, 1e-12);
    EXPECT_GE(w.normalized.minCoeff(), 0.0);
    EXPECT_LE(w.normalized.maxCoeff(), 1.0);
    for (int i = 0; i < b; ++i) {
      EXPECT_DOUBLE_EQ(w.raw[i], std::max(r2[i], 0.0) / (1.0 + var[i]));
    }
  }
}

TEST(WeightsTest, HigherR2StrictlyRaisesOwnWeight) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int b = 2 + static_cast<int>(rng.UniformIndex(4));
    Eigen::VectorXd r2(b), var(b);
    for (int i = 0; i < b; ++i) {
      r2[i] = rng.Uniform(0.05, 0.9);
      var[i] = rng.Uniform(0.0, 3.0);
    }
    const auto i = static_cast<Eigen::Index>(rng.UniformIndex(b));
    const double before = ComputeWeights(r2, var).normalized[i];
    r2[i] += rng.Uniform(0.01, 0.1);
    EXPECT_GT(ComputeWeights(r2, var).normalized[i], before);
  }
}

TEST(WeightsTest, CsvAndJson) {
  FusionWeights w = ComputeWeights(Eigen::Vector2d(0.9, 0.5), Eigen::Vector2d(0.0, 1.0));
  w.names = {"ridge", "gbt"};
  std::ostringstream csv;
  WriteWeightsCsv(w, csv);
  std::istringstream lines(csv.str());
  std::string header, first, second, extra;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(header, "model,r2_cv,pred_var,raw_w,norm_w");
  EXPECT_EQ(first.substr(0, 6), "ridge,");
  EXPECT_EQ(std::stod(first.substr(6)), 0.9);
  EXPECT_EQ(std::stod(first.substr(first.rfind(',') + 1)), w.normalized[0]);
  EXPECT_EQ(second.substr(0, 4), "gbt,");
  EXPECT_FALSE(std::getline(lines, extra) && !extra.empty());

  const FusionWeights back = WeightsFromJson(WeightsToJson(w));
  EXPECT_EQ(back.names, w.names);
  EXPECT_TRUE(back.normalized == w.normalized);
  EXPECT_TRUE(back.raw == w.raw);
}

// ---------------------------------------------------------------------------
// Out-of-fold generation

TEST(OofTest, ShapeAndNoLeakage) {
  auto log = std::make_shared<testutil::FitLog>();
  const DataTable t = Noiseless(10, 1);
  const std::vector<LearnerSpec> bases(3, testutil::MemoSpec(log));
  const OofResult oof = GenerateOof(bases, t, SplitSpec{0.25, 5, 3, Grouping::kByRow});
  ASSERT_EQ(oof.predictions.rows(), 10);
  ASSERT_EQ(oof.predictions.cols(), 3);
  // Memo predicts 1 exactly for rows it trained on.
  EXPECT_TRUE(oof.predictions.isZero());
  EXPECT_EQ(log->fits.size(), 15u);
}

TEST(OofTest, FoldBookkeeping) {
  auto log = std::make_shared<testutil::FitLog>();
  const DataTable t = Noiseless(23, 2);
  const SplitSpec split{0.25, 4, 99, Grouping::kByRow};
  const OofResult oof = GenerateOof({testutil::MemoSpec(log), testutil::MemoSpec(log)}, t, split);
  ASSERT_EQ(oof.folds.size(), 4u);
  ASSERT_EQ(oof.fold_of_row.size(), 23u);
  for (std::size_t k = 0; k < oof.folds.size(); ++k) {
    for (std::size_t j : oof.folds[k].validation) {
      EXPECT_EQ(oof.fold_of_row[j], static_cast<int>(k));
    }
  }
  // Seeds identify (model, fold); the fold's training set must exclude every
  // row that fold predicted.
  for (const auto& [seed, seen] : log->fits) {
    int hits = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t k = 0; k < 4; ++k) {
        if (seed != DeriveSeed(split.seed, {i, k})) continue;
        ++hits;
        for (std::size_t j : oof.folds[k].validation) EXPECT_EQ(seen.count(j), 0u);
        EXPECT_EQ(seen.size(), oof.folds[k].train.size());
      }
    }
    EXPECT_EQ(hits, 1);
  }
}

TEST(OofTest, PerfectLearnerScoresOne) {
  const DataTable t = Noiseless(40, 3);
  const OofResult oof = GenerateOof({FnSpec("perfect", Linear)}, t, SplitSpec{0.25, 5, 1});
  EXPECT_NEAR(oof.r2[0], 1.0, 1e-9);
}

TEST(OofTest, ConstantLearnerHasZeroVarianceAndNoSkill) {
  const DataTable t = Noiseless(40, 3);
  const OofResult oof = GenerateOof(
      {FnSpec("const", [](const Eigen::RowVectorXd&) { return 3.0; }), LearnerSpec(MeanParams{})},
      t, SplitSpec{0.25, 5, 1});
  EXPECT_EQ(oof.variance[0], 0.0);
  EXPECT_LE(oof.r2[0], 0.0);
  EXPECT_LE(oof.r2[1], 0.0);
}

TEST(OofTest, StatisticsMatchColumns) {
  const DataTable t = LinearTable(60, Eigen::Vector3d(2, -1, 0.5), 50, 1.0, 4);
  const OofResult oof =
      GenerateOof({LearnerSpec(RidgeParams{}), LearnerSpec(KnnParams{})}, t, SplitSpec{0.25, 5, 8});
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(oof.r2[i], R2(t.target(), Eigen::VectorXd(oof.predictions.col(i))));
    EXPECT_DOUBLE_EQ(oof.variance[i], Variance(Eigen::VectorXd(oof.predictions.col(i))));
  }
}

TEST(OofTest, ErrorsCarryModelAndFold) {
  const DataTable t = Noiseless(20, 5);
  try {
    GenerateOof({LearnerSpec(RidgeParams{}), testutil::FailingSpec(ErrorCode::kSingularSystem)}, t,
                SplitSpec{0.25, 5, 1});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularSystem);
    EXPECT_NE(std::string(e.what()).find("model failing, fold 0"), std::string::npos) << e.what();
  }
}

TEST(OofTest, TooManyFolds) {
  const DataTable t = Noiseless(4, 5);
  EXPECT_EQ(CodeOf([&] {
              GenerateOof({LearnerSpec(RidgeParams{})}, t, SplitSpec{0.25, 5, 1});
            }),
            ErrorCode::kTooManyFolds);
}

// ---------------------------------------------------------------------------
// Stacked model

TEST(StackedTest, PerfectPlusNoise) {
  const DataTable train = Noiseless(120, 6);
  const DataTable test = Noiseless(60, 7);
  const auto model =
      FitStacked({FnSpec("perfect", Linear), FnSpec("noise", Noise)}, train, SplitSpec{0.25, 5, 2}, 1e-3);
  EXPECT_EQ(model->weights().normalized[1], 0.0);
  const Eigen::VectorXd p = StackedPredict(*model, test).values;
  EXPECT_GE(R2(test.target(), p), 1.0 - 1e-6);
}

TEST(StackedTest, IdenticalBasesReproduceBase) {
  const DataTable t = Noiseless(80, 8);
  const auto model = FitStacked(
      {FnSpec("a", Linear), FnSpec("a", Linear), FnSpec("a", Linear)}, t, SplitSpec{0.25, 5, 2}, 1e-9);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(model->weights().normalized[i], 1.0 / 3.0, 1e-12);
  Eigen::VectorXd base(t.rows());
  for (std::size_t j = 0; j < t.rows(); ++j) base[j] = Linear(t.features().row(j));
  EXPECT_LE((model->Predict(t) - base).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(model->weights().names, (std::vector<std::string>{"a_0", "a_1", "a_2"}));
}

TEST(StackedTest, AlgebraicReduction) {
  const DataTable t = Noiseless(30, 9);
  std::vector<std::unique_ptr<Learner>> bases;
  for (const auto& spec : {FnSpec("one", Linear), FnSpec("two", Noise), LearnerSpec(MeanParams{})}) {
    bases.push_back(spec.Make());
    bases.back()->Fit(t);
  }
  const FusionWeights w =
      ComputeWeights(Eigen::Vector3d(0.8, 0.4, 0.2), Eigen::Vector3d(0.5, 0.1, 0.0));
  const double a = 1.7;
  RidgeSolution meta{Eigen::Vector3d(a / w.normalized[0], 0, 0), 0.0};
  StackedParams params;
  params.bases = {FnSpec("one", Linear), FnSpec("two", Noise), LearnerSpec(MeanParams{})};
  const auto model = StackedModel::Assemble(params, t.schema(), std::move(bases), w, meta);
  const Eigen::VectorXd p = StackedPredict(*model, t).values;
  for (std::size_t j = 0; j < t.rows(); ++j) {
    EXPECT_NEAR(p[j], a * Linear(t.features().row(j)), 1e-10);
  }
  EXPECT_TRUE(StackedPredict(*model, t).values == p);
}

TEST(StackedTest, AssembleRejectsBadParts) {
  const DataTable t = Noiseless(30, 9);
  std::vector<std::unique_ptr<Learner>> bases;
  bases.push_back(LearnerSpec(MeanParams{}).Make());
  bases.back()->Fit(t);
  bases.push_back(LearnerSpec(MeanParams{}).Make());
  bases.back()->Fit(t);
  const FusionWeights w = ComputeWeights(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0, 0));
  EXPECT_EQ(CodeOf([&] {
              StackedModel::Assemble({}, t.schema(), std::move(bases), w,
                                     RidgeSolution{Eigen::Vector3d::Zero(), 0});
            }),
            ErrorCode::kLengthMismatch);
}

StackedParams RealParams(std::uint64_t seed) {
  GbtParams gbt;
  gbt.n_trees = 30;
  LstmParams lstm;
  lstm.window = 4;
  lstm.hidden = 6;
  lstm.epochs = 4;
  StackedParams p;
  p.bases = {LearnerSpec(RidgeParams{}), LearnerSpec(gbt), LearnerSpec(lstm)};
  p.folds = 3;
  p.seed = seed;
  return p;
}

DataTable SmallSynth() {
  SynthConfig cfg;
  cfg.cells = 3;
  cfg.cycles_per_cell = 40;
  return Standardize(SynthGenerate(cfg).table);
}

TEST(StackedTest, SeededFitsSerializeIdentically) {
  const DataTable t = SmallSynth();
  StackedModel a(RealParams(5)), b(RealParams(5)), c(RealParams(6));
  a.Fit(t);
  b.Fit(t);
  c.Fit(t);
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
  EXPECT_NE(a.ToJson().dump(), c.ToJson().dump());
  EXPECT_EQ(a.meta().coef.size(), 3);
  EXPECT_EQ(a.weights().names, (std::vector<std::string>{"ridge", "gbt", "lstm"}));
}

TEST(StackedTest, CellStartsAreFilledAndFlagged) {
  const DataTable t = SmallSynth();
  StackedModel m(RealParams(5));
  m.Fit(t);
  const StackedPrediction p = StackedPredict(m, t);
  ASSERT_EQ(p.values.size(), static_cast<Eigen::Index>(t.rows()));
  ASSERT_EQ(p.sequence_filled.size(), t.rows());
  for (const auto& cell : t.Cells()) {
    for (std::size_t k = 0; k < cell.rows.size(); ++k) {
      EXPECT_EQ(p.sequence_filled[cell.rows[k]], k < 3);
    }
  }
  EXPECT_TRUE(p.values.allFinite());
  EXPECT_TRUE(m.Predict(t) == p.values);
}

TEST(StackedTest, PredictChecksFitAndSchema) {
  const DataTable t = SmallSynth();
  StackedModel m(RealParams(5));
  EXPECT_EQ(CodeOf([&] { StackedPredict(m, t); }), ErrorCode::kNotFitted);
  m.Fit(t);
  Schema fewer(t.schema().begin() + 1, t.schema().end());
  EXPECT_EQ(CodeOf([&] { StackedPredict(m, t.SelectFeatures(fewer)); }),
            ErrorCode::kSchemaMismatch);
}

TEST(StackedTest, NeedsTwoBases) {
  StackedParams p;
  p.bases = {LearnerSpec(RidgeParams{})};
  EXPECT_EQ(CodeOf([&] { LearnerSpec(p).Make(); }), ErrorCode::kInvalidConfig);
}

}  // namespace
}  // namespace lifefuse
