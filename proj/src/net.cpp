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

#include "hsikd/net.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "hsikd/error.hpp"
#include "hsikd/rng.hpp"

namespace hsikd {

namespace {

void add_bias_rows(Matrix& z, const std::vector<double>& bias) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data()) v = v < 0.0 ? 0.0 : v;  // NaN passes through
}

void check_input(const MlpModel& model, const Matrix& batch) {
  if (model.layer_dims.size() < 2) {
    throw ValidationError("model has no layers");
  }
  if (batch.cols() != model.input_dim()) {
    throw DimensionError("forward: batch has " + std::to_string(batch.cols()) +
                         " features, model expects " +
                         std::to_string(model.input_dim()));
  }
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    n += weights[i].size() + biases[i].size();
  return n;
}

MlpModel init_mlp(std::span<const std::size_t> layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) {
    throw ValidationError("init_mlp: need at least input and output dims");
  }
  for (std::size_t d : layer_dims) {
    if (d == 0) throw ValidationError("init_mlp: zero-width layer");
  }
  MlpModel model;
  model.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  model.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    Matrix w(layer_dims[l + 1], fan_in);
    for (double& v : w.data()) v = rng.uniform(-limit, limit);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(layer_dims[l + 1], 0.0);
  }
  return model;
}

MlpModel clone_params(const MlpModel& src) { return src; }

GradientSet GradientSet::zeros_like(const MlpModel& model) {
  GradientSet g;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    g.weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    g.biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

ForwardResult forward(const MlpModel& model, const Matrix& batch) {
  check_input(model, batch);
  ForwardResult out;
  out.cache.activations.push_back(batch);
  const std::size_t layers = model.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = matmul(out.cache.activations.back(), transpose(model.weights[l]));
    add_bias_rows(z, model.biases[l]);
    if (l + 1 == layers) {
      out.cache.pre_activations.push_back(z);
      out.logits = std::move(z);
    } else {
      Matrix a = z;
      relu_inplace(a);
      out.cache.pre_activations.push_back(std::move(z));
      out.cache.activations.push_back(std::move(a));
    }
  }
  return out;
}

Matrix predict_logits(const MlpModel& model, const Matrix& batch) {
  check_input(model, batch);
  Matrix a = batch;
  const std::size_t layers = model.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = matmul(a, transpose(model.weights[l]));
    add_bias_rows(z, model.biases[l]);
    if (l + 1 < layers) relu_inplace(z);
    a = std::move(z);
  }
  return a;
}

GradientSet backward(const MlpModel& model, const ForwardCache& cache,
                     const Matrix& d_logits) {
  const std::size_t layers = model.layer_count();
  if (cache.activations.size() != layers ||
      cache.pre_activations.size() != layers) {
    throw ValidationError("backward: cache does not match model depth");
  }
  if (d_logits.rows() != cache.batch_size() ||
      d_logits.cols() != model.output_dim()) {
    throw ValidationError("backward: d_logits is " +
                          std::to_string(d_logits.rows()) + "x" +
                          std::to_string(d_logits.cols()) + ", cache batch is " +
                          std::to_string(cache.batch_size()) + "x" +
                          std::to_string(model.output_dim()));
  }

  GradientSet grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);
  Matrix delta = d_logits;
  for (std::size_t l = layers; l-- > 0;) {
    grads.weights[l] = matmul_tn(delta, cache.activations[l]);
    std::vector<double> db(delta.cols(), 0.0);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      auto r = delta.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) db[j] += r[j];
    }
    grads.biases[l] = std::move(db);
    if (l == 0) break;
    Matrix prev = matmul(delta, model.weights[l]);
    const Matrix& z = cache.pre_activations[l - 1];
    auto pd = prev.data();
    auto zd = z.data();
    for (std::size_t i = 0; i < pd.size(); ++i)
      if (!(zd[i] > 0.0)) pd[i] = 0.0;
    delta = std::move(prev);
  }
  return grads;
}

AdamState AdamState::for_model(const MlpModel& model) {
  AdamState s;
  s.first_moment = GradientSet::zeros_like(model);
  s.second_moment = GradientSet::zeros_like(model);
  return s;
}

void adam_step(MlpModel& model, const GradientSet& grads, AdamState& state,
               double lr) {
  if (!(lr > 0.0)) throw ValidationError("adam_step: lr must be > 0");
  auto params = parameter_blocks(model);
  auto g = parameter_blocks(grads);
  if (state.first_moment.weights.empty() && state.step == 0) {
    state = AdamState::for_model(model);
  }
  auto m = parameter_blocks(std::as_const(state.first_moment));
  if (g.size() != params.size() || m.size() != params.size()) {
    throw DimensionError("adam_step: gradient/model block count mismatch");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (g[b].size() != params[b].size() || m[b].size() != params[b].size()) {
      throw DimensionError("adam_step: block " + std::to_string(b) +
                           " shape mismatch");
    }
    if (!all_finite(g[b])) {
      throw UpdateError("adam_step: non-finite gradient in parameter block " +
                        std::to_string(b) + "; step aborted");
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(AdamState::beta1, t);
  const double c2 = 1.0 - std::pow(AdamState::beta2, t);
  std::size_t b = 0;
  auto update = [&](std::span<double> p, std::span<const double> gb,
                    std::span<double> mb, std::span<double> vb) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      mb[i] = AdamState::beta1 * mb[i] + (1.0 - AdamState::beta1) * gb[i];
      vb[i] = AdamState::beta2 * vb[i] + (1.0 - AdamState::beta2) * gb[i] * gb[i];
      const double mhat = mb[i] / c1;
      const double vhat = vb[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + AdamState::epsilon);
    }
  };
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    update(params[b], g[b], state.first_moment.weights[l].data(),
           state.second_moment.weights[l].data());
    ++b;
    update(params[b], g[b], state.first_moment.biases[l],
           state.second_moment.biases[l]);
    ++b;
  }
}

std::vector<std::span<double>> parameter_blocks(MlpModel& model) {
  std::vector<std::span<double>> out;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    out.push_back(model.weights[l].data());
    out.emplace_back(model.biases[l]);
  }
  return out;
}

std::vector<std::span<const double>> parameter_blocks(const MlpModel& model) {
  std::vector<std::span<const double>> out;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    out.push_back(model.weights[l].data());
    out.emplace_back(model.biases[l]);
  }
  return out;
}

std::vector<std::span<const double>> parameter_blocks(const GradientSet& grads) {
  std::vector<std::span<const double>> out;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    out.push_back(grads.weights[l].data());
    out.emplace_back(grads.biases[l]);
  }
  return out;
}

}  // namespace hsikd
