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

#include "hsikd/verify.hpp"

#include <algorithm>
#include <cmath>

#include "hsikd/distill.hpp"
#include "hsikd/net.hpp"
#include "hsikd/rng.hpp"

namespace hsikd {

namespace {

constexpr double kDecompositionTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kStep = 1e-5;

struct Shape {
  std::size_t d;
  std::size_t p;
};

// Every third case uses a fixed 14/5 or 16/7 layout, the rest are random.
Shape case_shape(std::size_t i, Rng& rng) {
  if (i % 3 == 0) return {14, 5};
  if (i % 3 == 1) return {16, 7};
  const std::size_t d = 2 + rng.below(15);
  return {d, 1 + rng.below(d - 1)};
}

ClassPartition random_partition(Rng& rng, Shape s) {
  std::vector<std::size_t> order(s.d);
  for (std::size_t i = 0; i < s.d; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(s.p);
  return ClassPartition(s.d, order);
}

std::vector<double> random_logits(Rng& rng, std::size_t n, double scale) {
  std::vector<double> z(n);
  for (double& v : z) v = rng.uniform(-scale, scale);
  return z;
}

void record(VerifyReport& r, double err, std::uint64_t seed) {
  r.max_error = std::max(r.max_error, err);
  if (!(err <= r.tolerance)) r.failing_seeds.push_back(seed);
}

void record_case(VerifyReport& r, double worst, std::uint64_t seed) {
  ++r.cases;
  record(r, worst, seed);
}

}  // namespace

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

std::vector<VerifyReport> verify_losses(const VerifyOptions& opt) {
  VerifyReport decomposition{"decomposition", 0, 0.0, kDecompositionTol, {}};
  VerifyReport mask{"mask-invariance", 0, 0.0, 0.0, {}};
  const double temps[] = {1.0, 2.0, 4.0};

  for (std::size_t i = 0; i < opt.cases; ++i) {
    const std::uint64_t seed = derive_seed(opt.seed, i);
    Rng rng(seed);
    const Shape s = case_shape(i, rng);
    const ClassPartition part = random_partition(rng, s);
    const double t = temps[rng.below(3)];
    const auto zt = random_logits(rng, s.d, 5.0);
    auto zs = random_logits(rng, s.d, 5.0);

    const double coupled = kl_coupled(zt, zs, part, t);
    double total = kl_decoupled(zt, zs, part, t).total();
    if (opt.inject_bug) total *= 1.0 + 1e-6;
    record_case(decomposition, std::abs(total - coupled), seed);

    // Any change to incremental logits must leave the masked loss untouched.
    const double before = kd_loss_masked(zt, zs, part, t);
    auto zt2 = zt;
    for (std::size_t n : part.incremental()) {
      zs[n] = rng.uniform(-50.0, 50.0);
      zt2[n] = rng.uniform(-50.0, 50.0);
    }
    double after = kd_loss_masked(zt2, zs, part, t);
    if (opt.inject_bug) after += 1e-3 * zs[part.incremental().front()];
    record_case(mask, std::abs(after - before), seed);
  }
  return {decomposition, mask};
}

std::vector<VerifyReport> gradcheck(const VerifyOptions& opt) {
  VerifyReport ce{"ce-logit-grad", 0, 0.0, kGradTol, {}};
  VerifyReport coupled{"coupled-kd-logit-grad", 0, 0.0, kGradTol, {}};
  VerifyReport masked{"masked-kd-logit-grad", 0, 0.0, kGradTol, {}};
  VerifyReport params{"backprop-param-grad", 0, 0.0, kGradTol, {}};
  const double corrupt = opt.inject_bug ? 1.0 + 1e-2 : 1.0;
  // Parameter checks are the expensive part; a tenth of the cases suffices.
  const std::size_t cases = std::max<std::size_t>(1, opt.cases / 10);

  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t seed = derive_seed(opt.seed, i);
    Rng rng(seed);
    const Shape s{3 + rng.below(6), 0};
    const ClassPartition part =
        random_partition(rng, {s.d, 1 + rng.below(s.d - 1)});
    const std::size_t batch = 6;
    std::vector<std::size_t> labels(batch);
    for (auto& l : labels) l = rng.below(s.d);
    const double t = 1.0 + 3.0 * rng.uniform();
    Matrix zt(batch, s.d, random_logits(rng, batch * s.d, 3.0));
    Matrix zs(batch, s.d, random_logits(rng, batch * s.d, 3.0));

    // Logit gradients: base phase isolates CE; the incremental phases add
    // one KD flavour each on top of the already-checked CE.
    struct Variant {
      VerifyReport* report;
      Phase phase;
      bool mask;
    };
    for (const Variant v : {Variant{&ce, Phase::base, false},
                            Variant{&coupled, Phase::incremental, false},
                            Variant{&masked, Phase::incremental, true}}) {
      const DistillConfig cfg{t, 0.5 + rng.uniform(), v.mask};
      const Matrix teacher = v.phase == Phase::base ? Matrix() : zt;
      const LossAndGrad lg = loss_grads(teacher, zs, labels, part, cfg, v.phase);
      double worst = 0.0;
      for (std::size_t k = 0; k < zs.size(); ++k) {
        Matrix up = zs, down = zs;
        up.data()[k] += kStep;
        down.data()[k] -= kStep;
        const double num = (loss_grads(teacher, up, labels, part, cfg, v.phase).loss -
                            loss_grads(teacher, down, labels, part, cfg, v.phase).loss) /
                           (2 * kStep);
        worst = std::max(worst, relative_error(lg.d_student.data()[k] * corrupt, num));
      }
      record_case(*v.report, worst, seed);
    }

    // Full backprop on a small random network under the incremental loss.
    std::vector<std::size_t> dims{2 + rng.below(10)};
    const std::size_t hidden_layers = 1 + rng.below(2);
    for (std::size_t h = 0; h < hidden_layers; ++h) dims.push_back(2 + rng.below(12));
    dims.push_back(s.d);
    MlpModel model = init_mlp(dims, seed);
    for (auto& b : model.biases)
      for (double& v : b) v = rng.uniform(-0.5, 0.5);
    Matrix x(batch, dims.front(), random_logits(rng, batch * dims.front(), 1.0));
    const DistillConfig cfg{t, 1.0, true};
    const ForwardResult fr = forward(model, x);
    const GradientSet g =
        backward(model, fr.cache, loss_grads(zt, fr.logits, labels, part, cfg, Phase::incremental).d_student);
    const auto analytic = parameter_blocks(g);
    auto blocks = parameter_blocks(model);
    double worst = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t k = 0; k < blocks[b].size(); ++k) {
        const double saved = blocks[b][k];
        blocks[b][k] = saved + kStep;
        const double up =
            loss_grads(zt, predict_logits(model, x), labels, part, cfg, Phase::incremental).loss;
        blocks[b][k] = saved - kStep;
        const double down =
            loss_grads(zt, predict_logits(model, x), labels, part, cfg, Phase::incremental).loss;
        blocks[b][k] = saved;
        worst = std::max(worst, relative_error(analytic[b][k] * corrupt, (up - down) / (2 * kStep)));
      }
    }
    record_case(params, worst, seed);
  }
  return {ce, coupled, masked, params};
}

}  // namespace hsikd
