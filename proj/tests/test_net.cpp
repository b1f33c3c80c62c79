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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "hsikd/error.hpp"
#include "hsikd/net.hpp"
#include "oracles.hpp"

using namespace hsikd;

namespace {

// Quadratic probe loss L = 0.5 * sum(logits^2) + sum(c .* logits); its logit
// gradient is logits + c.
double probe_loss(const Matrix& logits, const Matrix& c) {
  double acc = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits.data()[i];
    acc += 0.5 * z * z + c.data()[i] * z;
  }
  return acc;
}

Matrix probe_grad(const Matrix& logits, const Matrix& c) {
  Matrix g = logits;
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += c.data()[i];
  return g;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

TEST_CASE("forward: zero model gives zero logits") {
  std::vector<std::size_t> dims{6, 5, 4};
  MlpModel m = init_mlp(dims, 1);
  for (auto block : parameter_blocks(m)) std::fill(block.begin(), block.end(), 0.0);
  Rng rng(2);
  Matrix x = oracle::random_matrix(rng, 3, 6);
  Matrix z = forward(m, x).logits;
  for (double v : z.data()) CHECK(v == 0.0);
}

TEST_CASE("forward: single linear layer equals X W^T + b") {
  std::vector<std::size_t> dims{7, 3};
  MlpModel m = init_mlp(dims, 5);
  Rng rng(6);
  for (double& b : m.biases[0]) b = rng.uniform(-1, 1);
  Matrix x = oracle::random_matrix(rng, 4, 7);
  Matrix expect = oracle::triple_loop(x, transpose(m.weights[0]));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) expect(i, j) += m.biases[0][j];
  CHECK(oracle::max_abs_diff(forward(m, x).logits, expect) < 1e-14);
  CHECK(predict_logits(m, x) == forward(m, x).logits);
}

TEST_CASE("forward: dead ReLU layer") {
  std::vector<std::size_t> dims{3, 4, 2};
  MlpModel m = init_mlp(dims, 9);
  std::fill(m.biases[0].begin(), m.biases[0].end(), -100.0);
  Rng rng(1);
  auto fr = forward(m, oracle::random_matrix(rng, 5, 3));
  for (double v : fr.cache.activations[1].data()) CHECK(v == 0.0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(fr.logits(i, j) == m.biases[1][j]);
}

TEST_CASE("forward: dimension mismatch") {
  std::vector<std::size_t> dims{3, 2};
  MlpModel m = init_mlp(dims, 1);
  CHECK_THROWS_AS(forward(m, Matrix(2, 4)), DimensionError);
}

TEST_CASE("forward is bit-deterministic and batch-composition independent") {
  std::vector<std::size_t> dims{12, 9, 5};
  MlpModel m = init_mlp(dims, 3);
  Rng rng(4);
  Matrix x = oracle::random_matrix(rng, 10, 12);
  Matrix a = forward(m, x).logits;
  CHECK(forward(m, x).logits == a);
  std::vector<std::size_t> pick{7};
  Matrix one = predict_logits(m, gather_rows(x, pick));
  for (std::size_t j = 0; j < 5; ++j) CHECK(one(0, j) == a(7, j));
}

TEST_CASE("backward: zero upstream gradient") {
  std::vector<std::size_t> dims{4, 3, 2};
  MlpModel m = init_mlp(dims, 1);
  Rng rng(1);
  auto fr = forward(m, oracle::random_matrix(rng, 3, 4));
  GradientSet g = backward(m, fr.cache, Matrix(3, 2));
  CHECK(g == GradientSet::zeros_like(m));
  CHECK_THROWS_AS(backward(m, fr.cache, Matrix(4, 2)), ValidationError);
}

TEST_CASE("backward: two stacked layers match analytic chain rule") {
  // All inputs and weights positive, so the hidden ReLU acts as identity.
  std::vector<std::size_t> dims{4, 3, 2};
  MlpModel m = init_mlp(dims, 1);
  Rng rng(8);
  for (auto block : parameter_blocks(m))
    for (double& v : block) v = rng.uniform(0.1, 1.0);
  Matrix x = oracle::random_matrix(rng, 5, 4, 0.1, 1.0);
  Matrix c = oracle::random_matrix(rng, 5, 2);
  auto fr = forward(m, x);
  GradientSet g = backward(m, fr.cache, c);  // L = sum(c .* logits)

  Matrix h = oracle::triple_loop(x, transpose(m.weights[0]));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) h(i, j) += m.biases[0][j];
  Matrix dw2 = oracle::triple_loop(transpose(c), h);
  Matrix dh = oracle::triple_loop(c, m.weights[1]);
  Matrix dw1 = oracle::triple_loop(transpose(dh), x);
  CHECK(oracle::max_abs_diff(g.weights[1], dw2) < 1e-12);
  CHECK(oracle::max_abs_diff(g.weights[0], dw1) < 1e-12);
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < 5; ++i) s += dh(i, j);
    CHECK(g.biases[0][j] == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("backward matches central finite differences on random models") {
  Rng rng(123);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<std::size_t> dims{2 + rng.below(19), 2 + rng.below(15),
                                  2 + rng.below(7)};
    MlpModel m = init_mlp(dims, 100 + trial);
    for (auto& b : m.biases)
      for (double& v : b) v = rng.uniform(-0.5, 0.5);
    Matrix x = oracle::random_matrix(rng, 6, dims[0]);
    Matrix c = oracle::random_matrix(rng, 6, dims.back());

    auto fr = forward(m, x);
    GradientSet g = backward(m, fr.cache, probe_grad(fr.logits, c));
    auto analytic = parameter_blocks(g);
    auto params = parameter_blocks(m);
    const double h = 1e-5;
    double worst = 0;
    for (std::size_t b = 0; b < params.size(); ++b) {
      for (std::size_t i = 0; i < params[b].size(); ++i) {
        const double saved = params[b][i];
        params[b][i] = saved + h;
        const double up = probe_loss(predict_logits(m, x), c);
        params[b][i] = saved - h;
        const double down = probe_loss(predict_logits(m, x), c);
        params[b][i] = saved;
        worst = std::max(worst, rel_err(analytic[b][i], (up - down) / (2 * h)));
      }
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  std::vector<std::size_t> dims{3, 2};
  MlpModel m = init_mlp(dims, 1);
  MlpModel before = m;
  AdamState s = AdamState::for_model(m);
  adam_step(m, GradientSet::zeros_like(m), s, 1e-3);
  CHECK(m == before);
  CHECK(s.step == 1);
}

TEST_CASE("adam: first step moves each parameter by about lr against the gradient") {
  std::vector<std::size_t> dims{3, 2};
  MlpModel m = init_mlp(dims, 1);
  MlpModel before = m;
  Rng rng(3);
  GradientSet g = GradientSet::zeros_like(m);
  for (double& v : g.weights[0].data()) v = rng.uniform(-2, 2);
  for (double& v : g.biases[0]) v = rng.uniform(-2, 2);
  AdamState s = AdamState::for_model(m);
  const double lr = 1e-3;
  adam_step(m, g, s, lr);
  auto gb = parameter_blocks(g);
  auto pa = parameter_blocks(std::as_const(m));
  auto pb = parameter_blocks(std::as_const(before));
  for (std::size_t b = 0; b < gb.size(); ++b) {
    for (std::size_t i = 0; i < gb[b].size(); ++i) {
      const double gi = gb[b][i];
      const double expect = -lr * gi / (std::abs(gi) + AdamState::epsilon);
      CHECK(pa[b][i] - pb[b][i] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("adam: minimizes a quadratic") {
  // Single bias-only parameter vector: f(theta) = |theta|^2, grad 2 theta.
  std::vector<std::size_t> dims{1, 4};
  MlpModel m = init_mlp(dims, 1);
  std::fill(m.weights[0].data().begin(), m.weights[0].data().end(), 0.0);
  m.biases[0] = {0.5, -0.5, 0.5, -0.5};  // norm 1
  AdamState s = AdamState::for_model(m);
  for (int step = 0; step < 100; ++step) {
    GradientSet g = GradientSet::zeros_like(m);
    for (std::size_t i = 0; i < 4; ++i) g.biases[0][i] = 2 * m.biases[0][i];
    adam_step(m, g, s, 0.05);
  }
  double norm = 0;
  for (double v : m.biases[0]) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-2);
}

TEST_CASE("adam: non-finite gradient aborts the step") {
  std::vector<std::size_t> dims{2, 2};
  MlpModel m = init_mlp(dims, 1);
  MlpModel before = m;
  AdamState s = AdamState::for_model(m);
  GradientSet g = GradientSet::zeros_like(m);
  g.biases[0][1] = std::nan("");
  CHECK_THROWS_AS(adam_step(m, g, s, 1e-3), UpdateError);
  CHECK(m == before);
  CHECK(s.step == 0);
}

TEST_CASE("clone_params is a deep, independent copy") {
  std::vector<std::size_t> dims{5, 4, 3};
  MlpModel src = init_mlp(dims, 77);
  MlpModel copy = clone_params(src);
  Rng rng(1);
  Matrix x = oracle::random_matrix(rng, 2, 5);
  CHECK(forward(src, x).logits == forward(copy, x).logits);
  copy.weights[0](0, 0) += 1.0;
  copy.biases[1][2] = 9.0;
  CHECK(src == init_mlp(dims, 77));
  CHECK(clone_params(init_mlp(dims, 77)) == init_mlp(dims, 77));
  CHECK_FALSE(init_mlp(dims, 77) == init_mlp(dims, 78));
}

TEST_CASE("init is He-uniform bounded") {
  std::vector<std::size_t> dims{50, 10, 3};
  MlpModel m = init_mlp(dims, 1);
  const double limit = std::sqrt(6.0 / 50.0);
  for (double v : m.weights[0].data()) CHECK(std::abs(v) <= limit);
  for (double v : m.biases[0]) CHECK(v == 0.0);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  std::vector<std::size_t> dims{6, 5, 4};
  MlpModel m = init_mlp(dims, 2024);
  m.biases[0][1] = -0.0;
  m.biases[1][0] = 1e-310;  // subnormal
  std::vector<std::string> names{"a", "b", "c", "d"};
  auto dir = std::filesystem::temp_directory_path() / "hsikd_test_ckpt";
  std::filesystem::create_directories(dir);
  auto path = dir / "m.ckpt";
  save_checkpoint(path, m, names);
  Checkpoint ck = load_checkpoint(path);
  CHECK(ck.class_names == names);
  auto a = parameter_blocks(std::as_const(m));
  auto b = parameter_blocks(std::as_const(ck.model));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::memcmp(a[i].data(), b[i].data(), a[i].size_bytes()) == 0);
  CHECK(ck.model.layer_dims == dims);
  CHECK(ck.model.seed == 2024);

  // header is one JSON line, then exactly parameter_count doubles
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("\"layer_dims\":[6,5,4]") != std::string::npos);
  const auto size = std::filesystem::file_size(path);
  CHECK(size == header.size() + 1 + m.parameter_count() * 8);

  std::filesystem::resize_file(path, size - 3);
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);
}
