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

// Dense feed-forward classifier with ReLU hidden layers and an identity
// output head, hand-written backpropagation, and Adam.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hsikd/numkit.hpp"

namespace hsikd {

struct MlpModel {
  std::vector<std::size_t> layer_dims;  // [d0, d1, ..., dL], dL = |D|
  std::vector<Matrix> weights;          // layer i: dims[i+1] x dims[i]
  std::vector<std::vector<double>> biases;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;

  bool operator==(const MlpModel&) const = default;
};

// He-uniform fan-in initialization, zero biases. Pure function of the seed.
MlpModel init_mlp(std::span<const std::size_t> layer_dims, std::uint64_t seed);

// Deep copy; the student starts from the teacher's weights.
MlpModel clone_params(const MlpModel& src);

// Same shapes as an MlpModel; also used for the Adam moment buffers.
struct GradientSet {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static GradientSet zeros_like(const MlpModel& model);
  bool operator==(const GradientSet&) const = default;
};

struct ForwardCache {
  // activations[0] is the input batch; activations[i] (0 < i < L) is the
  // ReLU output of hidden layer i. pre_activations[i] is layer i's affine
  // output before the nonlinearity.
  std::vector<Matrix> activations;
  std::vector<Matrix> pre_activations;

  std::size_t batch_size() const {
    return activations.empty() ? 0 : activations.front().rows();
  }
};

struct ForwardResult {
  Matrix logits;
  ForwardCache cache;
};

ForwardResult forward(const MlpModel& model, const Matrix& batch);

// Logits only; skips building the cache.
Matrix predict_logits(const MlpModel& model, const Matrix& batch);

// Gradients of a loss whose logit-gradient is `d_logits`. The caller owns any
// 1/n batch scaling.
GradientSet backward(const MlpModel& model, const ForwardCache& cache,
                     const Matrix& d_logits);

struct AdamState {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double epsilon = 1e-8;

  GradientSet first_moment;
  GradientSet second_moment;
  std::uint64_t step = 0;

  static AdamState for_model(const MlpModel& model);
};

// Bias-corrected Adam update. Throws UpdateError (leaving model and state
// untouched) if any gradient is non-finite.
void adam_step(MlpModel& model, const GradientSet& grads, AdamState& state,
               double lr);

// Flat views of every parameter block in checkpoint order: for each layer,
// weights then biases.
std::vector<std::span<double>> parameter_blocks(MlpModel& model);
std::vector<std::span<const double>> parameter_blocks(const MlpModel& model);
std::vector<std::span<const double>> parameter_blocks(const GradientSet& grads);

// Checkpoint: one line of JSON metadata terminated by '\n', then raw
// little-endian float64 parameter blocks in parameter_blocks() order.
struct Checkpoint {
  MlpModel model;
  std::vector<std::string> class_names;
};

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model,
                     std::span<const std::string> class_names);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hsikd
