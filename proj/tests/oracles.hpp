// Copyright 2026 The hsikd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent reference computations for tests. Nothing here calls into the
// code paths it is used to check; everything is straight-line brute force,
// mostly in long double.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "hsikd/numkit.hpp"
#include "hsikd/rng.hpp"

namespace hsikd::oracle {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                            double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

inline Matrix random_symmetric(Rng& rng, std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(-1, 1);
  return m;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n,
                                         double lo = -3.0, double hi = 3.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Matrix triple_loop(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k)
        acc += static_cast<long double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<double>(acc);
    }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

// Sample covariance with 1/(n-1), long-double two-pass.
inline Matrix covariance(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<long double> mean(d, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  for (auto& m : mean) m /= n;
  Matrix c(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      long double acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        acc += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
      c(a, b) = static_cast<double>(acc / (n - 1));
    }
  return c;
}

inline std::vector<long double> softmax_ld(const std::vector<double>& z,
                                           const std::vector<std::size_t>& idx,
                                           double t) {
  long double mx = -INFINITY;
  for (auto i : idx) mx = std::max<long double>(mx, z[i] / (long double)t);
  long double s = 0;
  std::vector<long double> e;
  for (auto i : idx) {
    e.push_back(std::exp(z[i] / (long double)t - mx));
    s += e.back();
  }
  for (auto& v : e) v /= s;
  return e;
}

// KL(p || q) by direct summation over two aligned distributions.
inline long double kl_ld(const std::vector<long double>& p,
                         const std::vector<long double>& q) {
  long double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) acc += p[i] * (std::log(p[i]) - std::log(q[i]));
  return acc;
}

inline std::vector<std::size_t> iota_idx(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Two-pass population mean/std.
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  long double m = 0;
  for (double x : v) m += x;
  m /= v.size();
  long double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return {static_cast<double>(m), static_cast<double>(std::sqrt(ss / v.size()))};
}

}  // namespace hsikd::oracle
