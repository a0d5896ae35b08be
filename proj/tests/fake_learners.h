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

#ifndef LIFEFUSE_TESTS_FAKE_LEARNERS_H_
#define LIFEFUSE_TESTS_FAKE_LEARNERS_H_

#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lifefuse/error.h"
#include "lifefuse/learner.h"

namespace lifefuse::testutil {

// Row-wise function of the features; training is a no-op.
class FnLearner : public Learner {
 public:
  using Fn = std::function<double(const Eigen::RowVectorXd&)>;
  FnLearner(std::string kind, Fn fn) : kind_(std::move(kind)), fn_(std::move(fn)) {}

  std::string_view kind() const override { return kind_; }
  nlohmann::json Descriptor() const override { return {{"kind", kind_}}; }

 protected:
  void DoFit(const DataTable&) override {}
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = fn_(x.row(i));
    return out;
  }
  nlohmann::json StateJson() const override { return nlohmann::json::object(); }
  void LoadState(const nlohmann::json&) override {}

 private:
  std::string kind_;
  Fn fn_;
};

inline LearnerSpec FnSpec(std::string kind, FnLearner::Fn fn) {
  return LearnerSpec(CustomSpec{
      kind, [kind, fn](std::uint64_t) { return std::make_unique<FnLearner>(kind, fn); }});
}

// Shared record of every fit: (seed, training cycles).
struct FitLog {
  std::mutex mu;
  std::vector<std::pair<std::uint64_t, std::set<std::uint64_t>>> fits;
};

// Predicts 1 for rows whose cycle was in its training set, 0 otherwise.
// Meant for single-cell tables where the cycle is the row index.
class MemoLearner : public Learner {
 public:
  MemoLearner(std::uint64_t seed, std::shared_ptr<FitLog> log)
      : seed_(seed), log_(std::move(log)) {}

  std::string_view kind() const override { return "memo"; }
  nlohmann::json Descriptor() const override { return {{"kind", "memo"}}; }

 protected:
  void DoFit(const DataTable& table) override {
    seen_ = std::set<std::uint64_t>(table.cycles().begin(), table.cycles().end());
    std::lock_guard lock(log_->mu);
    log_->fits.emplace_back(seed_, seen_);
  }
  Eigen::VectorXd DoPredict(const DataTable& table) const override {
    Eigen::VectorXd out(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) {
      out[static_cast<Eigen::Index>(i)] = seen_.count(table.cycles()[i]) ? 1.0 : 0.0;
    }
    return out;
  }
  Eigen::VectorXd DoPredictRows(const FeatureMatrix& x) const override {
    return Eigen::VectorXd::Zero(x.rows());
  }
  nlohmann::json StateJson() const override { return nlohmann::json::object(); }
  void LoadState(const nlohmann::json&) override {}

 private:
  std::uint64_t seed_;
  std::shared_ptr<FitLog> log_;
  std::set<std::uint64_t> seen_;
};

inline LearnerSpec MemoSpec(std::shared_ptr<FitLog> log) {
  return LearnerSpec(CustomSpec{
      "memo", [log](std::uint64_t seed) { return std::make_unique<MemoLearner>(seed, log); }});
}

// Fit always throws `code`.
inline LearnerSpec FailingSpec(ErrorCode code) {
  struct Failing : FnLearner {
    explicit Failing(ErrorCode c)
        : FnLearner("failing", [](const Eigen::RowVectorXd&) { return 0.0; }), code(c) {}
    void DoFit(const DataTable&) override { Fail(code, "refusing to fit"); }
    ErrorCode code;
  };
  return LearnerSpec(CustomSpec{
      "failing", [code](std::uint64_t) { return std::make_unique<Failing>(code); }});
}

}  // namespace lifefuse::testutil

#endif  // LIFEFUSE_TESTS_FAKE_LEARNERS_H_
