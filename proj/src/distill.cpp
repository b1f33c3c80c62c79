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

#include "hsikd/distill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hsikd/error.hpp"

namespace hsikd {

namespace {

void check_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ValidationError("temperature must be finite and > 0");
  }
}

void check_logits(std::span<const double> z, const ClassPartition& part,
                  const char* what) {
  if (z.size() != part.class_count()) {
    throw ValidationError(std::string(what) + ": " + std::to_string(z.size()) +
                          " logits for " + std::to_string(part.class_count()) +
                          " classes");
  }
}

// log-sum-exp of z[idx]/T.
double logsumexp(std::span<const double> z, std::span<const std::size_t> idx,
                 double t) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) mx = std::max(mx, z[i] / t);
  double s = 0.0;
  for (std::size_t i : idx) s += std::exp(z[i] / t - mx);
  return mx + std::log(s);
}

// sum_i p_i (log p_i - log q_i) with log p_i = z_i/T - lse_p, skipping p_i = 0.
double kl_over(std::span<const double> zt, std::span<const double> zs,
               std::span<const std::size_t> idx, double t, double lse_t,
               double lse_s) {
  double acc = 0.0;
  for (std::size_t i : idx) {
    const double log_pt = zt[i] / t - lse_t;
    const double pt = std::exp(log_pt);
    if (pt == 0.0) continue;
    acc += pt * (log_pt - (zs[i] / t - lse_s));
  }
  return acc;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

ClassPartition::ClassPartition(std::size_t n_classes,
                               std::vector<std::size_t> base)
    : n_classes_(n_classes), is_base_(n_classes, false) {
  for (std::size_t c : base) {
    if (c >= n_classes) {
      throw ValidationError("partition: base class " + std::to_string(c) +
                            " out of range");
    }
    if (is_base_[c]) {
      throw ValidationError("partition: base class " + std::to_string(c) +
                            " listed twice");
    }
    is_base_[c] = true;
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    (is_base_[c] ? base_ : incremental_).push_back(c);
  if (base_.empty()) throw ValidationError("partition: base set P is empty");
  if (incremental_.empty()) {
    throw ValidationError("partition: incremental set N is empty");
  }
}

ClassPartition ClassPartition::all_base(std::size_t n_classes) {
  ClassPartition p;
  p.n_classes_ = n_classes;
  p.is_base_.assign(n_classes, true);
  p.base_ = all_indices(n_classes);
  return p;
}

std::vector<double> softmax_t(std::span<const double> z, double temperature) {
  check_temperature(temperature);
  std::vector<double> p(z.size());
  if (z.empty()) return p;
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : z) mx = std::max(mx, v / temperature);
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] / temperature - mx);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

double nontarget_mass(std::span<const double> p, const ClassPartition& part) {
  if (p.size() != part.class_count()) {
    throw ValidationError("nontarget_mass: " + std::to_string(p.size()) +
                          " probabilities for " +
                          std::to_string(part.class_count()) + " classes");
  }
  double mass = 0.0;
  for (std::size_t i : part.incremental()) mass += p[i];
  return mass;
}

std::vector<double> within_n_dist(std::span<const double> z,
                                  const ClassPartition& part,
                                  double temperature) {
  check_temperature(temperature);
  check_logits(z, part, "within_n_dist");
  const auto& n = part.incremental();
  if (n.empty()) throw ValidationError("within_n_dist: N is empty");
  const double lse = logsumexp(z, n, temperature);
  std::vector<double> q;
  q.reserve(n.size());
  for (std::size_t j : n) q.push_back(std::exp(z[j] / temperature - lse));
  return q;
}

double kl_coupled(std::span<const double> zt, std::span<const double> zs,
                  const ClassPartition& part, double temperature) {
  check_temperature(temperature);
  check_logits(zt, part, "kl_coupled");
  check_logits(zs, part, "kl_coupled");
  const auto all = all_indices(part.class_count());
  const double lse_t = logsumexp(zt, all, temperature);
  const double lse_s = logsumexp(zs, all, temperature);
  return kl_over(zt, zs, part.base(), temperature, lse_t, lse_s) +
         kl_over(zt, zs, part.incremental(), temperature, lse_t, lse_s);
}

DecoupledKl kl_decoupled(std::span<const double> zt, std::span<const double> zs,
                         const ClassPartition& part, double temperature) {
  check_temperature(temperature);
  check_logits(zt, part, "kl_decoupled");
  check_logits(zs, part, "kl_decoupled");
  const auto all = all_indices(part.class_count());
  const double lse_t = logsumexp(zt, all, temperature);
  const double lse_s = logsumexp(zs, all, temperature);

  DecoupledKl out;
  out.base_term = kl_over(zt, zs, part.base(), temperature, lse_t, lse_s);
  const auto& n = part.incremental();
  if (n.empty()) return out;

  const double lse_nt = logsumexp(zt, n, temperature);
  const double lse_ns = logsumexp(zs, n, temperature);
  const double log_mass_t = lse_nt - lse_t;
  const double log_mass_s = lse_ns - lse_s;
  const double mass_t = std::exp(log_mass_t);
  if (mass_t == 0.0) return out;
  out.mass_term = mass_t * (log_mass_t - log_mass_s);
  out.within_n_term = mass_t * kl_over(zt, zs, n, temperature, lse_nt, lse_ns);
  return out;
}

double kd_loss_masked(std::span<const double> zt, std::span<const double> zs,
                      const ClassPartition& part, double temperature) {
  check_temperature(temperature);
  check_logits(zt, part, "kd_loss_masked");
  check_logits(zs, part, "kd_loss_masked");
  const auto& p = part.base();
  if (p.empty()) throw ValidationError("kd_loss_masked: P is empty");
  const double lse_t = logsumexp(zt, p, temperature);
  const double lse_s = logsumexp(zs, p, temperature);
  return kl_over(zt, zs, p, temperature, lse_t, lse_s);
}

double cross_entropy(std::span<const double> z, std::size_t label) {
  if (label >= z.size()) {
    throw ValidationError("cross_entropy: label " + std::to_string(label) +
                          " out of range for " + std::to_string(z.size()) +
                          " classes");
  }
  const auto all = all_indices(z.size());
  return logsumexp(z, all, 1.0) - z[label];
}

LossAndGrad loss_grads(const Matrix& teacher_logits,
                       const Matrix& student_logits,
                       std::span<const std::size_t> labels,
                       const ClassPartition& part, const DistillConfig& cfg,
                       Phase phase) {
  const std::size_t n = student_logits.rows();
  const std::size_t d = student_logits.cols();
  if (d != part.class_count()) {
    throw ValidationError("loss_grads: student logits have " +
                          std::to_string(d) + " columns for " +
                          std::to_string(part.class_count()) + " classes");
  }
  if (labels.size() != n) {
    throw ValidationError("loss_grads: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(n) + " rows");
  }
  if (n == 0) throw ValidationError("loss_grads: empty batch");

  const bool distill = phase == Phase::incremental;
  if (distill) {
    check_temperature(cfg.temperature);
    if (!(cfg.lambda_kd >= 0.0) || !std::isfinite(cfg.lambda_kd)) {
      throw ValidationError("loss_grads: lambda_kd must be finite and >= 0");
    }
    if (teacher_logits.rows() != n || teacher_logits.cols() != d) {
      throw ValidationError(
          "loss_grads: incremental phase needs teacher logits shaped like the "
          "student's");
    }
  } else if (!teacher_logits.empty()) {
    throw ValidationError("loss_grads: base phase takes no teacher logits");
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const bool use_kd = distill && cfg.lambda_kd > 0.0;
  const double t = cfg.temperature;
  // d/dz_s [lambda T^2 KL(softmax(zt/T) || softmax(zs/T))] = lambda T (ps - pt)
  const double kd_scale = use_kd ? cfg.lambda_kd * t * t : 0.0;
  const double kd_grad_scale = use_kd ? cfg.lambda_kd * t * inv_n : 0.0;

  LossAndGrad out;
  out.d_student = Matrix(n, d);
  double ce_sum = 0.0;
  double kd_sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    auto zs = student_logits.row(r);
    auto g = out.d_student.row(r);
    ce_sum += cross_entropy(zs, labels[r]);
    const auto ps = softmax_t(zs, 1.0);
    for (std::size_t c = 0; c < d; ++c) g[c] = ps[c] * inv_n;
    g[labels[r]] -= inv_n;

    if (!use_kd) continue;
    auto zt = teacher_logits.row(r);
    if (cfg.mask_enabled) {
      kd_sum += kd_loss_masked(zt, zs, part, t);
      const auto& p = part.base();
      const double lse_t = logsumexp(zt, p, t);
      const double lse_s = logsumexp(zs, p, t);
      for (std::size_t k : p) {
        const double qs = std::exp(zs[k] / t - lse_s);
        const double qt = std::exp(zt[k] / t - lse_t);
        g[k] += kd_grad_scale * (qs - qt);
      }
    } else {
      kd_sum += kl_coupled(zt, zs, part, t);
      const auto pst = softmax_t(zs, t);
      const auto ptt = softmax_t(zt, t);
      for (std::size_t c = 0; c < d; ++c) g[c] += kd_grad_scale * (pst[c] - ptt[c]);
    }
  }
  out.loss = ce_sum * inv_n + kd_scale * kd_sum * inv_n;
  return out;
}

}  // namespace hsikd
