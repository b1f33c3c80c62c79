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

// Seeded self-checks shipped with the binary.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hsikd {

struct VerifyReport {
  std::string name;
  std::size_t cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::vector<std::uint64_t> failing_seeds;

  bool passed() const { return failing_seeds.empty(); }
};

struct VerifyOptions {
  std::uint64_t seed = 2024;
  std::size_t cases = 1000;
  // Test hook: corrupts the quantity under test so the failure path can be
  // exercised end to end.
  bool inject_bug = false;
};

// Three-term decomposition vs. the coupled KL on random logit pairs, plus
// exact invariance of the masked loss to incremental-class logits.
std::vector<VerifyReport> verify_losses(const VerifyOptions& opt);

// Central differences (h = 1e-5) against analytic gradients: logit gradients
// of cross-entropy, coupled KD and masked KD, and full backprop parameter
// gradients of small random networks.
std::vector<VerifyReport> gradcheck(const VerifyOptions& opt);

// Relative error used by the gradient checks.
double relative_error(double analytic, double numeric);

}  // namespace hsikd
