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

#include "lifefuse/learners/tree.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lifefuse/error.h"

namespace lifefuse {
namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const Eigen::VectorXd& y,
              const TreeParams& params, Rng* rng)
      : x_(x), y_(y), params_(params), rng_(rng) {
    const int f = static_cast<int>(x.cols());
    features_per_split_ = (params.features_per_split <= 0 ||
                           params.features_per_split >= f)
                              ? f
                              : params.features_per_split;
    if (features_per_split_ < f && rng_ == nullptr) {
      Fail(ErrorCode::kInvalidArgument, "feature subsampling needs an Rng");
    }
  }

  std::vector<RegressionTree::Node> Build(std::vector<std::size_t> rows) {
    Grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  int Grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto r : rows) {
      const double v = y_(static_cast<Eigen::Index>(r));
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    nodes_[static_cast<std::size_t>(id)].value =
        sum / static_cast<double>(rows.size());

    const auto n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    if (depth >= params_.max_depth || lo == hi || n < 2 * min_leaf) return id;

    const SplitChoice best = FindSplit(rows, sum);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (x_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left
                                                                        : right)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = Grow(std::move(left), depth + 1);
    const int r = Grow(std::move(right), depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<int> CandidateFeatures() {
    const int f = static_cast<int>(x_.cols());
    std::vector<int> all(static_cast<std::size_t>(f));
    std::iota(all.begin(), all.end(), 0);
    if (features_per_split_ == f) return all;
    // Partial Fisher-Yates, then ascending so the tie rule holds.
    for (int i = 0; i < features_per_split_; ++i) {
      const auto j = i + static_cast<int>(rng_->UniformIndex(
                             static_cast<std::uint64_t>(f - i)));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(features_per_split_));
    std::sort(all.begin(), all.end());
    return all;
  }

  SplitChoice FindSplit(const std::vector<std::size_t>& rows, double total) {
    const auto n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    const double parent = total * total / static_cast<double>(n);
    SplitChoice best;
    std::vector<std::size_t> order(rows);
    for (int f : CandidateFeatures()) {
      const auto col = static_cast<Eigen::Index>(f);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return x_(static_cast<Eigen::Index>(a), col) <
                                x_(static_cast<Eigen::Index>(b), col);
                       });
      double left_sum = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        left_sum += y_(static_cast<Eigen::Index>(order[i - 1]));
        if (i < min_leaf || n - i < min_leaf) continue;
        const double a = x_(static_cast<Eigen::Index>(order[i - 1]), col);
        const double b = x_(static_cast<Eigen::Index>(order[i]), col);
        if (!(a < b)) continue;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(n - i);
        const double right_sum = total - left_sum;
        const double gain =
            left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
        if (gain > best.gain) {
          double threshold = a + 0.5 * (b - a);
          if (!(threshold < b)) threshold = a;
          best = {f, threshold, gain};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  const Eigen::VectorXd& y_;
  TreeParams params_;
  Rng* rng_;
  int features_per_split_;
  std::vector<RegressionTree::Node> nodes_;
};

}  // namespace

RegressionTree RegressionTree::Fit(const FeatureMatrix& x,
                                   const Eigen::VectorXd& y,
                                   std::span<const std::size_t> rows,
                                   const TreeParams& params, Rng* rng) {
  if (rows.empty()) Fail(ErrorCode::kEmptyTable, "tree needs at least one row");
  if (params.max_depth < 0 || params.min_leaf < 1) {
    Fail(ErrorCode::kInvalidArgument, "bad tree parameters");
  }
  RegressionTree tree;
  TreeBuilder builder(x, y, params, rng);
  tree.nodes_ = builder.Build(std::vector<std::size_t>(rows.begin(), rows.end()));
  return tree;
}

Eigen::VectorXd RegressionTree::Predict(const FeatureMatrix& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = PredictOne(x.row(i));
  return out;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int max_depth = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.feature >= 0) {
      d[static_cast<std::size_t>(n.left)] = d[i] + 1;
      d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    }
    max_depth = std::max(max_depth, d[i]);
  }
  return max_depth;
}

nlohmann::json RegressionTree::ToJson() const {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value;
  for (const auto& n : nodes_) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value}};
}

RegressionTree RegressionTree::FromJson(const nlohmann::json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const auto n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n ||
      value.size() != n || n == 0) {
    Fail(ErrorCode::kInvalidConfig, "malformed tree");
  }
  RegressionTree tree;
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 &&
        (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
         left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n))) {
      Fail(ErrorCode::kInvalidConfig, "malformed tree links");
    }
    tree.nodes_.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
  }
  return tree;
}

}  // namespace lifefuse
