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

// Distillation losses over a base/incremental class partition.
//
// Notation used throughout: D is the full label set (one logit per class),
// P the base classes learned by the teacher, N = D \ P the incremental
// classes. Class indices here are 0-based logit positions.
//
// The coupled teacher->student divergence
//
//   KL(pt || ps) = sum_{k in P} pt_k log(pt_k / ps_k)
//                + sum_{i in N} pt_i log(pt_i / ps_i)
//
// splits exactly into three terms,
//
//   base:      sum_{k in P} pt_k log(pt_k / ps_k)
//   mass:      pt_N log(pt_N / ps_N)              pt_N = sum_{i in N} pt_i
//   within-N:  pt_N * sum_{j in N} qt_j log(qt_j / qs_j),   q = p / p_N
//
// The masked loss drops N entirely and compares the teacher and student
// softmaxes renormalized over P. All probabilities are evaluated in the log
// domain from the logits, so no clamping is needed inside the logs.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hsikd/numkit.hpp"

namespace hsikd {

class ClassPartition {
 public:
  ClassPartition() = default;

  // Base classes are given by index; everything else in [0, n_classes) is
  // incremental. Both sides must be non-empty.
  ClassPartition(std::size_t n_classes, std::vector<std::size_t> base);

  // Degenerate partition with P = D and N empty. Only the loss functions
  // accept it; kd_loss_masked then reduces to the plain KL.
  static ClassPartition all_base(std::size_t n_classes);

  std::size_t class_count() const noexcept { return n_classes_; }
  const std::vector<std::size_t>& base() const noexcept { return base_; }
  const std::vector<std::size_t>& incremental() const noexcept {
    return incremental_;
  }
  bool is_base(std::size_t c) const { return c < n_classes_ && is_base_[c]; }
  bool is_incremental(std::size_t c) const {
    return c < n_classes_ && !is_base_[c];
  }

  bool operator==(const ClassPartition&) const = default;

 private:
  std::size_t n_classes_ = 0;
  std::vector<std::size_t> base_;
  std::vector<std::size_t> incremental_;
  std::vector<bool> is_base_;
};

struct DistillConfig {
  double temperature = 2.0;
  double lambda_kd = 1.0;
  bool mask_enabled = true;
};

enum class Phase { base, incremental };

// exp(z/T) / sum_D exp(z/T), max-subtracted.
std::vector<double> softmax_t(std::span<const double> z, double temperature);

// Probability mass on the incremental classes.
double nontarget_mass(std::span<const double> p, const ClassPartition& part);

// Softmax over N only, in part.incremental() order.
std::vector<double> within_n_dist(std::span<const double> z,
                                  const ClassPartition& part,
                                  double temperature);

double kl_coupled(std::span<const double> zt, std::span<const double> zs,
                  const ClassPartition& part, double temperature);

struct DecoupledKl {
  double base_term = 0.0;
  double mass_term = 0.0;
  double within_n_term = 0.0;

  double total() const { return base_term + mass_term + within_n_term; }
};

DecoupledKl kl_decoupled(std::span<const double> zt, std::span<const double> zs,
                         const ClassPartition& part, double temperature);

// KL between teacher and student softmaxes restricted to P and renormalized
// over P. Reads no incremental-class logit.
double kd_loss_masked(std::span<const double> zt, std::span<const double> zs,
                      const ClassPartition& part, double temperature);

// -log softmax(z)[label] at temperature 1.
double cross_entropy(std::span<const double> z, std::size_t label);

struct LossAndGrad {
  double loss = 0.0;
  Matrix d_student;  // dL/dz_student, same shape as the student logits
};

// Batch objective. Base phase: mean cross-entropy (teacher logits must be
// empty, cfg ignored). Incremental phase:
//   mean CE(zs, labels) + lambda * T^2 * mean KD(zt || zs)
// with KD = kd_loss_masked if cfg.mask_enabled, else kl_coupled. Teacher
// logits are constants.
LossAndGrad loss_grads(const Matrix& teacher_logits,
                       const Matrix& student_logits,
                       std::span<const std::size_t> labels,
                       const ClassPartition& part, const DistillConfig& cfg,
                       Phase phase);

}  // namespace hsikd
