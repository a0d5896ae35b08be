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

#ifndef LIFEFUSE_TESTS_TEST_UTIL_H_
#define LIFEFUSE_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lifefuse/data.h"
#include "lifefuse/random.h"

namespace lifefuse::testutil {

inline Schema Names(Eigen::Index f) {
  Schema s;
  for (Eigen::Index i = 0; i < f; ++i) s.push_back("f" + std::to_string(i));
  return s;
}

// Rows are split into `cells` contiguous blocks; cycles count within a block.
inline DataTable MakeTable(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           int cells = 1, Schema names = {}) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (names.empty()) names = Names(x.cols());
  std::vector<Source> sources(n, Source::kSynthetic);
  std::vector<std::string> ids(n);
  std::vector<std::uint64_t> cycles(n);
  const std::size_t per = (n + cells - 1) / static_cast<std::size_t>(cells);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = "c" + std::to_string(i / per);
    cycles[i] = i % per;
  }
  return DataTable(names, sources, ids, cycles, x, y);
}

inline Eigen::MatrixXd RandomMatrix(Eigen::Index rows, Eigen::Index cols,
                                    Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.Normal();
  }
  return m;
}

// y = x coef + intercept + N(0, noise)
inline DataTable LinearTable(int n, const Eigen::VectorXd& coef,
                             double intercept, double noise,
                             std::uint64_t seed, int cells = 1) {
  Rng rng(seed);
  const Eigen::MatrixXd x = RandomMatrix(n, coef.size(), rng);
  Eigen::VectorXd y = x * coef;
  for (int i = 0; i < n; ++i) y[i] += intercept + noise * rng.Normal();
  return MakeTable(x, y, cells);
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path FreshDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lifefuse_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace lifefuse::testutil

#endif  // LIFEFUSE_TESTS_TEST_UTIL_H_
