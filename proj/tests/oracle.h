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

#ifndef LIFEFUSE_TESTS_ORACLE_H_
#define LIFEFUSE_TESTS_ORACLE_H_

// Loop-based reference implementations that share no code with the library.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace lifefuse::oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

inline double Mae(const Vec& y, const Vec& f) {
  long double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - f[i]);
  return static_cast<double>(s / y.size());
}

inline double Rmse(const Vec& y, const Vec& f) {
  long double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double d = y[i] - f[i];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s / y.size()));
}

inline double R2(const Vec& y, const Vec& f) {
  long double mean = 0;
  for (double v : y) mean += v;
  mean /= y.size();
  long double res = 0, tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    res += (y[i] - f[i]) * static_cast<long double>(y[i] - f[i]);
    tot += (y[i] - mean) * (y[i] - mean);
  }
  return static_cast<double>(1.0L - res / tot);
}

// Gaussian elimination with partial pivoting; a is n x n.
inline Vec Solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= m * a[c][k];
      b[r] -= m * b[c];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Ridge with intercept: centre, form X'X + lambda I and X'y by loops, solve.
inline std::pair<Vec, double> Ridge(const Mat& x, const Vec& y, double lambda) {
  const std::size_t n = x.size(), f = x[0].size();
  Vec xm(f, 0.0);
  double ym = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ym += y[i];
    for (std::size_t j = 0; j < f; ++j) xm[j] += x[i][j];
  }
  ym /= n;
  for (double& v : xm) v /= n;
  Mat g(f, Vec(f, 0.0));
  Vec rhs(f, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < f; ++a) {
      rhs[a] += (x[i][a] - xm[a]) * (y[i] - ym);
      for (std::size_t b = 0; b < f; ++b) {
        g[a][b] += (x[i][a] - xm[a]) * (x[i][b] - xm[b]);
      }
    }
  }
  for (std::size_t a = 0; a < f; ++a) g[a][a] += lambda;
  Vec beta = Solve(g, rhs);
  double icpt = ym;
  for (std::size_t a = 0; a < f; ++a) icpt -= xm[a] * beta[a];
  return {beta, icpt};
}

}  // namespace lifefuse::oracle

#endif  // LIFEFUSE_TESTS_ORACLE_H_
