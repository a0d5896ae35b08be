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

#include "lifefuse/learners/lstm.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lifefuse/error.h"
#include "lifefuse/learners/adam.h"

namespace lifefuse {

using nlohmann::json;

namespace {

Eigen::ArrayXXd Sigmoid(const Eigen::ArrayXXd& z) {
  return 1.0 / (1.0 + (-z).exp());
}

// Read-only views into the flat parameter vector.
struct ConstParams {
  ConstParams(const Eigen::VectorXd& theta, Eigen::Index f, Eigen::Index h)
      : w(theta.data(), 4 * h, f + h),
        b(theta.data() + 4 * h * (f + h), 4 * h),
        head(theta.data() + 4 * h * (f + h) + 4 * h, h),
        head_bias(theta(4 * h * (f + h) + 4 * h + h)) {}

  Eigen::Map<const Eigen::MatrixXd> w;
  Eigen::Map<const Eigen::VectorXd> b;
  Eigen::Map<const Eigen::VectorXd> head;
  double head_bias;
};

struct StepCache {
  Eigen::MatrixXd xh;  // [x_t; h_{t-1}]
  Eigen::ArrayXXd i, f, g, o;
  Eigen::ArrayXXd c_prev, c;
  Eigen::ArrayXXd tanh_c;
};

}  // namespace

LstmNetwork::LstmNetwork(int inputs, int hidden)
    : inputs_(inputs),
      hidden_(hidden),
      theta_(Eigen::VectorXd::Zero(ParameterCount(inputs, hidden))) {}

Eigen::Index LstmNetwork::ParameterCount(int inputs, int hidden) {
  const Eigen::Index f = inputs;
  const Eigen::Index h = hidden;
  return 4 * h * (f + h) + 4 * h + h + 1;
}

void LstmNetwork::InitUniform(Rng& rng) {
  const Eigen::Index f = inputs_;
  const Eigen::Index h = hidden_;
  const Eigen::Index gate_params = 4 * h * (f + h) + 4 * h;
  const double gate_bound = 1.0 / std::sqrt(static_cast<double>(f + h));
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(h));
  for (Eigen::Index k = 0; k < theta_.size(); ++k) {
    const double bound = k < gate_params ? gate_bound : head_bound;
    theta_(k) = rng.Uniform(-bound, bound);
  }
}

Eigen::MatrixXd LstmNetwork::FinalHidden(const SequenceBatch& batch) const {
  const Eigen::Index f = inputs_;
  const Eigen::Index h = hidden_;
  const Eigen::Index nb = batch.batch_size();
  const ConstParams p(theta_, f, h);
  Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(h, nb);
  Eigen::ArrayXXd cell = Eigen::ArrayXXd::Zero(h, nb);
  Eigen::MatrixXd xh(f + h, nb);
  for (const auto& x : batch.steps) {
    if (x.rows() != f || x.cols() != nb) {
      Fail(ErrorCode::kSchemaMismatch, "sequence step has the wrong shape");
    }
    xh.topRows(f) = x;
    xh.bottomRows(h) = hidden;
    const Eigen::ArrayXXd z = ((p.w * xh).colwise() + p.b).array();
    const Eigen::ArrayXXd i = Sigmoid(z.topRows(h));
    const Eigen::ArrayXXd fg = Sigmoid(z.middleRows(h, h));
    const Eigen::ArrayXXd g = z.middleRows(2 * h, h).tanh();
    const Eigen::ArrayXXd o = Sigmoid(z.bottomRows(h));
    cell = fg * cell + i * g;
    hidden = (o * cell.tanh()).matrix();
  }
  return hidden;
}

Eigen::VectorXd LstmNetwork::Forward(const SequenceBatch& batch) const {
  const ConstParams p(theta_, inputs_, hidden_);
  return (FinalHidden(batch).transpose() * p.head).array() + p.head_bias;
}

double LstmNetwork::Loss(const SequenceBatch& batch,
                         const Eigen::VectorXd& target) const {
  const Eigen::VectorXd err = Forward(batch) - target;
  return 0.5 * err.squaredNorm() / static_cast<double>(target.size());
}

double LstmNetwork::LossAndGradient(const SequenceBatch& batch,
                                    const Eigen::VectorXd& target,
                                    Eigen::VectorXd* grad) const {
  const Eigen::Index f = inputs_;
  const Eigen::Index h = hidden_;
  const Eigen::Index nb = batch.batch_size();
  if (target.size() != nb) {
    Fail(ErrorCode::kLengthMismatch, "target length differs from batch size");
  }
  const ConstParams p(theta_, f, h);

  std::vector<StepCache> cache(batch.steps.size());
  Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(h, nb);
  Eigen::ArrayXXd cell = Eigen::ArrayXXd::Zero(h, nb);
  for (std::size_t t = 0; t < batch.steps.size(); ++t) {
    auto& s = cache[t];
    s.xh.resize(f + h, nb);
    s.xh.topRows(f) = batch.steps[t];
    s.xh.bottomRows(h) = hidden;
    const Eigen::ArrayXXd z = ((p.w * s.xh).colwise() + p.b).array();
    s.i = Sigmoid(z.topRows(h));
    s.f = Sigmoid(z.middleRows(h, h));
    s.g = z.middleRows(2 * h, h).tanh();
    s.o = Sigmoid(z.bottomRows(h));
    s.c_prev = cell;
    s.c = s.f * cell + s.i * s.g;
    s.tanh_c = s.c.tanh();
    cell = s.c;
    hidden = (s.o * s.tanh_c).matrix();
  }
  const Eigen::VectorXd out =
      (hidden.transpose() * p.head).array() + p.head_bias;
  const Eigen::VectorXd err = out - target;
  const double inv_b = 1.0 / static_cast<double>(nb);
  const double loss = 0.5 * err.squaredNorm() * inv_b;

  grad->setZero(theta_.size());
  Eigen::Map<Eigen::MatrixXd> dw(grad->data(), 4 * h, f + h);
  Eigen::Map<Eigen::VectorXd> db(grad->data() + 4 * h * (f + h), 4 * h);
  Eigen::Map<Eigen::VectorXd> dhead(grad->data() + 4 * h * (f + h) + 4 * h, h);
  double& dhead_bias = (*grad)(4 * h * (f + h) + 4 * h + h);

  const Eigen::RowVectorXd dout = err.transpose() * inv_b;  // 1 x B
  dhead = hidden * dout.transpose();
  dhead_bias = dout.sum();

  Eigen::ArrayXXd dh = (p.head * dout).array();  // H x B
  Eigen::ArrayXXd dc = Eigen::ArrayXXd::Zero(h, nb);
  Eigen::MatrixXd dz(4 * h, nb);
  for (std::size_t t = batch.steps.size(); t-- > 0;) {
    const auto& s = cache[t];
    dc += dh * s.o * (1.0 - s.tanh_c.square());
    dz.topRows(h) = (dc * s.g * s.i * (1.0 - s.i)).matrix();
    dz.middleRows(h, h) = (dc * s.c_prev * s.f * (1.0 - s.f)).matrix();
    dz.middleRows(2 * h, h) = (dc * s.i * (1.0 - s.g.square())).matrix();
    dz.bottomRows(h) = (dh * s.tanh_c * s.o * (1.0 - s.o)).matrix();
    dw.noalias() += dz * s.xh.transpose();
    db += dz.rowwise().sum();
    dh = (p.w.rightCols(h).transpose() * dz).array();
    dc = dc * s.f;
  }
  return loss;
}

// ---------------------------------------------------------------------------

namespace {

struct Window {
  std::vector<std::size_t> rows;  // window rows, oldest first
};

SequenceBatch MakeBatch(const FeatureMatrix& xs,
                        std::span<const Window* const> windows, int length) {
  SequenceBatch batch;
  const auto nb = static_cast<Eigen::Index>(windows.size());
  batch.steps.assign(static_cast<std::size_t>(length),
                     Eigen::MatrixXd(xs.cols(), nb));
  for (Eigen::Index b = 0; b < nb; ++b) {
    const auto& rows = windows[static_cast<std::size_t>(b)]->rows;
    for (int t = 0; t < length; ++t) {
      batch.steps[static_cast<std::size_t>(t)].col(b) =
          xs.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(t)]))
              .transpose();
    }
  }
  return batch;
}

constexpr std::size_t kPredictChunk = 512;

}  // namespace

LstmRegressor::LstmRegressor(LstmParams params)
    : params_(params), network_(1, std::max(1, params.hidden)) {}

json LstmRegressor::Descriptor() const {
  return {{"kind", "lstm"},
          {"params",
           {{"window", params_.window},
            {"hidden", params_.hidden},
            {"epochs", params_.epochs},
            {"batch", params_.batch},
            {"step_size", params_.step_size},
            {"seed", params_.seed},
            {"grad_clip", params_.grad_clip}}}};
}

void LstmRegressor::DoFit(const DataTable& table) {
  const auto cells = table.Cells();
  const auto w = static_cast<std::size_t>(params_.window);
  for (const auto& c : cells) {
    if (c.rows.size() < w) {
      Fail(ErrorCode::kWindowTooLong,
           "cell " + c.cell_id + " has " + std::to_string(c.rows.size()) +
               " cycles, window is " + std::to_string(w));
    }
  }
  scaler_ = ColumnScaler::Fit(table.features());
  const FeatureMatrix xs = scaler_.Apply(table.features());
  const auto& y = table.target();
  y_mean_ = y.mean();
  const double var =
      y.size() > 1 ? (y.array() - y_mean_).square().sum() /
                         static_cast<double>(y.size() - 1)
                   : 0.0;
  y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;

  std::vector<Window> windows;
  std::vector<double> targets;
  for (const auto& c : cells) {
    for (std::size_t end = w - 1; end < c.rows.size(); ++end) {
      windows.push_back(
          {std::vector<std::size_t>(c.rows.begin() + static_cast<long>(end + 1 - w),
                                    c.rows.begin() + static_cast<long>(end + 1))});
      targets.push_back((y(static_cast<Eigen::Index>(c.rows[end])) - y_mean_) /
                        y_scale_);
    }
  }

  network_ = LstmNetwork(static_cast<int>(table.num_features()), params_.hidden);
  Rng init_rng(DeriveSeed(params_.seed, {0}));
  network_.InitUniform(init_rng);
  Rng order_rng(DeriveSeed(params_.seed, {1}));
  Adam adam(network_.parameters().size(), AdamConfig{params_.step_size});

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(params_.batch);
  std::vector<const Window*> picked;
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    order_rng.Shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      picked.clear();
      Eigen::VectorXd target(static_cast<Eigen::Index>(stop - start));
      for (std::size_t k = start; k < stop; ++k) {
        picked.push_back(&windows[order[k]]);
        target(static_cast<Eigen::Index>(k - start)) = targets[order[k]];
      }
      const SequenceBatch batch = MakeBatch(xs, picked, params_.window);
      const double loss = network_.LossAndGradient(batch, target, &grad);
      if (!std::isfinite(loss)) {
        Fail(ErrorCode::kNumericalFailure, "lstm loss diverged");
      }
      ClipGradientNorm(grad, params_.grad_clip);
      adam.Step(network_.parameters(), grad);
    }
  }
}

Eigen::VectorXd LstmRegressor::RunNetwork(const SequenceBatch& batch) const {
  return (network_.Forward(batch).array() * y_scale_ + y_mean_).matrix();
}

SequencePrediction LstmRegressor::PredictWithCoverage(
    const DataTable& table) const {
  if (!fitted()) Fail(ErrorCode::kNotFitted, "lstm used before fit");
  SequencePrediction out;
  const auto n = table.rows();
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  out.covered.assign(n, false);
  if (n == 0) return out;

  const FeatureMatrix xs = scaler_.Apply(table.features());
  const auto w = static_cast<std::size_t>(params_.window);
  const auto cells = table.Cells();
  std::vector<Window> windows;
  std::vector<std::size_t> ends;
  for (const auto& c : cells) {
    for (std::size_t end = w - 1; end < c.rows.size(); ++end) {
      windows.push_back(
          {std::vector<std::size_t>(c.rows.begin() + static_cast<long>(end + 1 - w),
                                    c.rows.begin() + static_cast<long>(end + 1))});
      ends.push_back(c.rows[end]);
    }
  }
  std::vector<const Window*> picked;
  for (std::size_t start = 0; start < windows.size(); start += kPredictChunk) {
    const std::size_t stop = std::min(windows.size(), start + kPredictChunk);
    picked.clear();
    for (std::size_t k = start; k < stop; ++k) picked.push_back(&windows[k]);
    const Eigen::VectorXd pred = RunNetwork(MakeBatch(xs, picked, params_.window));
    for (std::size_t k = start; k < stop; ++k) {
      out.values(static_cast<Eigen::Index>(ends[k])) =
          pred(static_cast<Eigen::Index>(k - start));
      out.covered[ends[k]] = true;
    }
  }

  std::vector<std::size_t> orphans;
  for (const auto& c : cells) {
    double sum = 0.0;
    std::size_t count = 0;
    for (auto r : c.rows) {
      if (out.covered[r]) {
        sum += out.values(static_cast<Eigen::Index>(r));
        ++count;
      }
    }
    for (auto r : c.rows) {
      if (out.covered[r]) continue;
      if (count > 0) {
        out.values(static_cast<Eigen::Index>(r)) = sum / static_cast<double>(count);
      } else {
        orphans.push_back(r);
      }
    }
  }
  if (!orphans.empty()) {
    FeatureMatrix rows(static_cast<Eigen::Index>(orphans.size()), xs.cols());
    for (std::size_t k = 0; k < orphans.size(); ++k) {
      rows.row(static_cast<Eigen::Index>(k)) =
          table.features().row(static_cast<Eigen::Index>(orphans[k]));
    }
    const Eigen::VectorXd pred = DoPredictRows(rows);
    for (std::size_t k = 0; k < orphans.size(); ++k) {
      out.values(static_cast<Eigen::Index>(orphans[k])) =
          pred(static_cast<Eigen::Index>(k));
    }
  }
  return out;
}

Eigen::VectorXd LstmRegressor::DoPredict(const DataTable& table) const {
  return PredictWithCoverage(table).values;
}

Eigen::VectorXd LstmRegressor::DoPredictRows(const FeatureMatrix& x) const {
  const FeatureMatrix xs = scaler_.Apply(x);
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index start = 0; start < x.rows();
       start += static_cast<Eigen::Index>(kPredictChunk)) {
    const Eigen::Index len =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(kPredictChunk),
                               x.rows() - start);
    SequenceBatch batch;
    batch.steps.assign(static_cast<std::size_t>(params_.window),
                       xs.middleRows(start, len).transpose());
    out.segment(start, len) = RunNetwork(batch);
  }
  return out;
}

json LstmRegressor::StateJson() const {
  return {{"scaler", scaler_.ToJson()},
          {"y_mean", y_mean_},
          {"y_scale", y_scale_},
          {"inputs", network_.inputs()},
          {"theta", VectorToJson(network_.parameters())}};
}

void LstmRegressor::LoadState(const json& state) {
  scaler_ = ColumnScaler::FromJson(state.at("scaler"));
  y_mean_ = state.at("y_mean").get<double>();
  y_scale_ = state.at("y_scale").get<double>();
  network_ = LstmNetwork(state.at("inputs").get<int>(), params_.hidden);
  const Eigen::VectorXd theta = VectorFromJson(state.at("theta"));
  if (theta.size() != network_.parameters().size()) {
    Fail(ErrorCode::kInvalidConfig, "lstm parameter count mismatch");
  }
  network_.parameters() = theta;
}

}  // namespace lifefuse
