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

#include "hsikd/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hsikd/error.hpp"

namespace hsikd {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

// The inner loops are axpy-shaped (no reductions), which vectorizes without
// reassociating floating-point sums; every output row depends only on its
// own input row, so results do not change with batch composition.
Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape(a) + " * " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    const double* arow = a.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double s = arow[k];
      if (s == 0.0) continue;
      const double* brow = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) dst[j] += s * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: " + shape(a) + "^T * " + shape(b));
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* arow = a.row(r).data();
    const double* brow = b.row(r).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = arow[i];
      if (s == 0.0) continue;
      double* dst = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) dst[j] += s * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), src.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= src.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(indices[i]) +
                           " out of range for " + shape(src));
    }
    auto from = src.row(indices[i]);
    std::copy(from.begin(), from.end(), out.row(i).begin());
  }
  return out;
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

EigenDecomposition eigh_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw ValidationError("eigh_symmetric: matrix is not square (" + shape(m) +
                          ")");
  }
  if (!(tol > 0.0)) throw ValidationError("eigh_symmetric: tol must be > 0");
  if (!all_finite(m.data())) {
    throw ValidationError("eigh_symmetric: non-finite entry");
  }
  const std::size_t n = m.rows();
  double scale = 1.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-9 * scale) {
        throw ValidationError("eigh_symmetric: matrix is not symmetric at (" +
                              std::to_string(i) + "," + std::to_string(j) +
                              ")");
      }
    }
  }

  Matrix a = m;
  // Symmetrize exactly so rotations act on a truly symmetric matrix.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  Matrix v = Matrix::identity(n);

  auto max_off = [&] {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        best = std::max(best, std::abs(a(i, j)));
    return best;
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  while (max_off() > tol) {
    if (sweep++ == kMaxSweeps) {
      throw ConvergenceError("eigh_symmetric: no convergence after " +
                             std::to_string(kMaxSweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Rutishauser's stable rotation: t = tan(phi), smaller root.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x) > a(y, y);
  });
  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, j) = v(k, order[j]);
  }
  return out;
}

PcaModel pca_fit(const Matrix& spectra, std::size_t k) {
  const std::size_t n = spectra.rows();
  const std::size_t bands = spectra.cols();
  if (k > bands) {
    throw ValidationError("pca_fit: k=" + std::to_string(k) + " exceeds " +
                          std::to_string(bands) + " bands");
  }
  if (n < 2) throw ValidationError("pca_fit: need at least 2 samples");
  if (!all_finite(spectra.data())) {
    throw ValidationError("pca_fit: non-finite spectra");
  }

  PcaModel model;
  model.mean.assign(bands, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = spectra.row(i);
    for (std::size_t b = 0; b < bands; ++b) model.mean[b] += r[b];
  }
  for (double& m : model.mean) m /= static_cast<double>(n);

  Matrix cov(bands, bands);
  std::vector<double> centered(bands);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = spectra.row(i);
    for (std::size_t b = 0; b < bands; ++b) centered[b] = r[b] - model.mean[b];
    for (std::size_t b = 0; b < bands; ++b) {
      const double s = centered[b];
      if (s == 0.0) continue;
      double* dst = cov.row(b).data();
      for (std::size_t c = b; c < bands; ++c) dst[c] += s * centered[c];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t b = 0; b < bands; ++b) {
    for (std::size_t c = b; c < bands; ++c) {
      cov(b, c) /= denom;
      cov(c, b) = cov(b, c);
    }
  }

  double frob = 0.0;
  for (double v : cov.data()) frob += v * v;
  frob = std::sqrt(frob);
  const double tol = std::max(frob * 1e-14, 1e-300);
  EigenDecomposition eig = eigh_symmetric(cov, tol);

  model.components = Matrix(k, bands);
  model.eigenvalues.assign(eig.eigenvalues.begin(),
                           eig.eigenvalues.begin() + static_cast<long>(k));
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t arg = 0;
    for (std::size_t b = 1; b < bands; ++b) {
      if (std::abs(eig.eigenvectors(b, j)) > std::abs(eig.eigenvectors(arg, j)))
        arg = b;
    }
    const double sign = eig.eigenvectors(arg, j) < 0.0 ? -1.0 : 1.0;
    for (std::size_t b = 0; b < bands; ++b)
      model.components(j, b) = sign * eig.eigenvectors(b, j);
  }
  return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& spectra) {
  if (spectra.cols() != model.bands()) {
    throw DimensionError("pca_project: spectra have " +
                         std::to_string(spectra.cols()) + " bands, model has " +
                         std::to_string(model.bands()));
  }
  const std::size_t k = model.k();
  const std::size_t bands = model.bands();
  Matrix out(spectra.rows(), k);
  std::vector<double> centered(bands);
  for (std::size_t i = 0; i < spectra.rows(); ++i) {
    auto r = spectra.row(i);
    for (std::size_t b = 0; b < bands; ++b) centered[b] = r[b] - model.mean[b];
    for (std::size_t j = 0; j < k; ++j) {
      auto comp = model.components.row(j);
      double acc = 0.0;
      for (std::size_t b = 0; b < bands; ++b) acc += centered[b] * comp[b];
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace hsikd
