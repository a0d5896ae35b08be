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

#ifndef LIFEFUSE_LEARNERS_ADAM_H_
#define LIFEFUSE_LEARNERS_ADAM_H_

#include <cmath>

#include <Eigen/Dense>

namespace lifefuse {

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First-order adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  Adam(Eigen::Index size, AdamConfig config)
      : config_(config),
        m_(Eigen::VectorXd::Zero(size)),
        v_(Eigen::VectorXd::Zero(size)) {}

  void Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
    v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config_.beta1, t_);
    const double c2 = 1.0 - std::pow(config_.beta2, t_);
    params.array() -= config_.step_size * (m_.array() / c1) /
                      ((v_.array() / c2).sqrt() + config_.epsilon);
  }

  long steps() const { return t_; }

 private:
  AdamConfig config_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

// Rescales grad in place so its Euclidean norm is at most max_norm.
inline void ClipGradientNorm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
}

}  // namespace lifefuse

#endif  // LIFEFUSE_LEARNERS_ADAM_H_
