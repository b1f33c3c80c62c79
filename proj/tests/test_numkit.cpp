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

#include <doctest.h>

#include <cmath>

#include "hsikd/error.hpp"
#include "hsikd/numkit.hpp"
#include "oracles.hpp"

using namespace hsikd;

TEST_CASE("matmul identity and hand-computed cases") {
  Rng rng(1);
  Matrix m = oracle::random_matrix(rng, 3, 4);
  CHECK(matmul(Matrix::identity(3), m) == m);

  Matrix a{{1, 2}, {3, 4}};
  Matrix b{{0}, {1}};
  CHECK(matmul(a, b) == Matrix{{2}, {4}});
}

TEST_CASE("matmul matches triple-loop oracle") {
  Rng rng(7);
  Matrix a = oracle::random_matrix(rng, 5, 7);
  Matrix b = oracle::random_matrix(rng, 7, 3);
  Matrix c = matmul(a, b);
  REQUIRE(c.rows() == 5);
  REQUIRE(c.cols() == 3);
  CHECK(oracle::max_abs_diff(c, oracle::triple_loop(a, b)) < 1e-14);
  CHECK(oracle::max_abs_diff(matmul_tn(transpose(a), b), c) < 1e-14);
}

TEST_CASE("matmul shape mismatch") {
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(matmul_tn(Matrix(2, 3), Matrix(3, 3)), DimensionError);
}

TEST_CASE("matmul associativity on random triples") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n1 = 1 + rng.below(9), n2 = 1 + rng.below(9),
               n3 = 1 + rng.below(9), n4 = 1 + rng.below(9);
    Matrix a = oracle::random_matrix(rng, n1, n2);
    Matrix b = oracle::random_matrix(rng, n2, n3);
    Matrix c = oracle::random_matrix(rng, n3, n4);
    Matrix left = matmul(matmul(a, b), c);
    Matrix right = matmul(a, matmul(b, c));
    double scale = 0;
    for (double v : left.data()) scale = std::max(scale, std::abs(v));
    CHECK(oracle::max_abs_diff(left, right) <= 1e-9 * std::max(scale, 1.0));
  }
}

TEST_CASE("eigh diagonal and 2x2") {
  Matrix d{{3, 0, 0}, {0, 1, 0}, {0, 0, 2}};
  auto e = eigh_symmetric(d, 1e-12);
  CHECK(e.eigenvalues == std::vector<double>{3, 2, 1});
  CHECK(std::abs(e.eigenvectors(0, 0)) == 1.0);
  CHECK(std::abs(e.eigenvectors(2, 1)) == 1.0);
  CHECK(std::abs(e.eigenvectors(1, 2)) == 1.0);

  auto e2 = eigh_symmetric(Matrix{{2, 1}, {1, 2}}, 1e-12);
  CHECK(e2.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e2.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigh residual and orthonormality up to 32x32") {
  Rng rng(2024);
  for (std::size_t n : {1u, 2u, 5u, 8u, 16u, 32u}) {
    Matrix m = oracle::random_symmetric(rng, n);
    auto e = eigh_symmetric(m, 1e-12);
    const Matrix& q = e.eigenvectors;
    for (std::size_t j = 1; j < n; ++j)
      CHECK(e.eigenvalues[j - 1] >= e.eigenvalues[j]);

    Matrix qtq = matmul_tn(q, q);
    CHECK(oracle::max_abs_diff(qtq, Matrix::identity(n)) <= 1e-8);

    Matrix lam(n, n);
    for (std::size_t i = 0; i < n; ++i) lam(i, i) = e.eigenvalues[i];
    Matrix rebuilt = matmul(matmul(q, lam), transpose(q));
    CHECK(oracle::max_abs_diff(rebuilt, m) <= 1e-7);

    // M v = lambda v per pair.
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        double mv = 0;
        for (std::size_t k = 0; k < n; ++k) mv += m(i, k) * q(k, j);
        CHECK(std::abs(mv - e.eigenvalues[j] * q(i, j)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("eigh rejects bad input") {
  CHECK_THROWS_AS(eigh_symmetric(Matrix{{1, 2}, {0, 1}}, 1e-12),
                  ValidationError);
  CHECK_THROWS_AS(eigh_symmetric(Matrix(2, 3), 1e-12), ValidationError);
  CHECK_THROWS_AS(eigh_symmetric(Matrix::identity(2), 0.0), ValidationError);
}

TEST_CASE("pca on rank-1 data") {
  Matrix x(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    const double t = static_cast<double>(i) - 20.0;
    x(i, 0) = 2.0 * t + 1.0;
    x(i, 1) = -1.0 * t + 4.0;
  }
  PcaModel p = pca_fit(x, 2);
  const double total = p.eigenvalues[0] + p.eigenvalues[1];
  CHECK(p.eigenvalues[0] / total > 1.0 - 1e-12);
  CHECK(std::abs(p.eigenvalues[1]) <= 1e-10);
  // sign convention: largest |entry| is non-negative
  CHECK(p.components(0, 0) > 0.0);
}

TEST_CASE("pca isotropic sample has small eigenvalue spread") {
  Rng rng(5);
  Matrix x(20000, 4);
  for (double& v : x.data()) v = rng.normal();
  PcaModel p = pca_fit(x, 4);
  Matrix cov = oracle::covariance(x);
  double mean_eig = 0;
  for (double ev : p.eigenvalues) mean_eig += ev / 4;
  double trace = 0;
  for (std::size_t i = 0; i < 4; ++i) trace += cov(i, i);
  CHECK(mean_eig == doctest::Approx(trace / 4).epsilon(1e-10));
  CHECK((p.eigenvalues.front() - p.eigenvalues.back()) / mean_eig < 0.1);
}

TEST_CASE("pca invariants on random data") {
  Rng rng(99);
  const std::size_t n = 300, bands = 12;
  Matrix mix = oracle::random_matrix(rng, bands, bands);
  Matrix x = matmul(oracle::random_matrix(rng, n, bands), mix);
  for (double& v : x.data()) v += 5.0;

  PcaModel p = pca_fit(x, bands);
  Matrix cov = oracle::covariance(x);
  double trace = 0, sum = 0;
  for (std::size_t i = 0; i < bands; ++i) trace += cov(i, i);
  for (double ev : p.eigenvalues) sum += ev;
  CHECK(std::abs(sum - trace) <= 1e-8);

  for (std::size_t j = 0; j < bands; ++j) {
    CHECK(p.eigenvalues[j] >= -1e-10);
    if (j > 0) CHECK(p.eigenvalues[j - 1] >= p.eigenvalues[j]);
    double big = 0;
    for (std::size_t b = 0; b < bands; ++b)
      if (std::abs(p.components(j, b)) > std::abs(big)) big = p.components(j, b);
    CHECK(big >= 0.0);
  }
  Matrix gram = matmul(p.components, transpose(p.components));
  CHECK(oracle::max_abs_diff(gram, Matrix::identity(bands)) <= 1e-8);

  Matrix proj = pca_project(p, x);
  Matrix pcov = oracle::covariance(proj);
  for (std::size_t j = 0; j < bands; ++j) {
    CHECK(std::abs(pcov(j, j) - p.eigenvalues[j]) <=
          1e-6 * std::abs(p.eigenvalues[j]));
    if (j > 0) CHECK(pcov(j - 1, j - 1) >= pcov(j, j));
  }

  // k = B: back-projection reconstructs the input.
  Matrix back = matmul(proj, p.components);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < bands; ++b) back(i, b) += p.mean[b];
  CHECK(oracle::max_abs_diff(back, x) <= 1e-8);
}

TEST_CASE("pca edge cases") {
  Rng rng(3);
  Matrix x = oracle::random_matrix(rng, 10, 3);
  CHECK_THROWS_AS(pca_fit(x, 4), ValidationError);
  CHECK_THROWS_AS(pca_fit(Matrix(1, 3), 2), ValidationError);

  PcaModel p = pca_fit(x, 2);
  Matrix mean_row(1, 3, std::vector<double>(p.mean));
  Matrix z = pca_project(p, mean_row);
  CHECK(z(0, 0) == 0.0);
  CHECK(z(0, 1) == 0.0);
  CHECK_THROWS_AS(pca_project(p, Matrix(2, 4)), DimensionError);

  // zero variance: eigenvalues zero, components still orthonormal
  Matrix flat(8, 3, 2.5);
  PcaModel pf = pca_fit(flat, 3);
  for (double ev : pf.eigenvalues) CHECK(ev == 0.0);
  CHECK(oracle::max_abs_diff(matmul(pf.components, transpose(pf.components)),
                             Matrix::identity(3)) <= 1e-12);
}
