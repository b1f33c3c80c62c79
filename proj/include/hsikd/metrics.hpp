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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hsikd {

// Rows are true classes, columns predicted classes. Labels are 1-based at the
// confuse() boundary and 0-based inside the matrix.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t n_classes)
      : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t class_count() const noexcept { return n_; }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) {
    return counts_[truth * n_ + predicted];
  }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * n_ + predicted];
  }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;
  std::uint64_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confuse(std::span<const std::size_t> true_labels,
                        std::span<const std::size_t> predicted,
                        std::size_t n_classes);

// All rates below are percentages.
double overall_accuracy(const ConfusionMatrix& cm);
double average_accuracy(const ConfusionMatrix& cm);
double kappa(const ConfusionMatrix& cm);

// Per-class recall in percent; classes with an empty row report NaN.
std::vector<double> per_class_accuracy(const ConfusionMatrix& cm);

// Mean recall over a subset of classes (0-based), in percent.
double subset_average_accuracy(const ConfusionMatrix& cm,
                               std::span<const std::size_t> classes);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (1/n)
};

MeanStd aggregate(std::span<const double> values);

// "98.47±0.65"
std::string format_mean_std(const MeanStd& v);

// Header row of class names, then one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm,
                          std::span<const std::string> class_names);

}  // namespace hsikd
