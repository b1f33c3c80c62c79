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

// Dense linear algebra: row-major matrices, a cyclic-Jacobi symmetric
// eigensolver, and PCA.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace hsikd {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// Rows of `src` selected by `indices`, in order.
Matrix gather_rows(const Matrix& src, std::span<const std::size_t> indices);

bool all_finite(std::span<const double> values);

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // column j pairs with eigenvalues[j]
};

// Cyclic Jacobi. Iterates full sweeps until the largest off-diagonal
// magnitude is <= tol; gives up after 100 sweeps.
EigenDecomposition eigh_symmetric(const Matrix& m, double tol);

struct PcaModel {
  std::vector<double> mean;         // length B
  Matrix components;                // K x B, orthonormal rows
  std::vector<double> eigenvalues;  // length K, non-increasing

  std::size_t bands() const noexcept { return mean.size(); }
  std::size_t k() const noexcept { return components.rows(); }
};

// `spectra` is n_pixels x B. Covariance uses the unbiased 1/(n-1) estimator.
// Each component row is sign-normalized so its largest-magnitude entry is
// non-negative (first such entry on ties).
PcaModel pca_fit(const Matrix& spectra, std::size_t k);

// (spectra - mean) * components^T, shape n x K.
Matrix pca_project(const PcaModel& model, const Matrix& spectra);

}  // namespace hsikd
