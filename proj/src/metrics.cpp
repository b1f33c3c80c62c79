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

#include "hsikd/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "hsikd/error.hpp"

namespace hsikd {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < n_; ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < n_; ++t) s += at(t, predicted);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t c = 0; c < n_; ++c) s += at(c, c);
  return s;
}

ConfusionMatrix confuse(std::span<const std::size_t> true_labels,
                        std::span<const std::size_t> predicted,
                        std::size_t n_classes) {
  if (true_labels.size() != predicted.size()) {
    throw ValidationError("confuse: " + std::to_string(true_labels.size()) +
                          " true labels vs " + std::to_string(predicted.size()) +
                          " predictions");
  }
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const std::size_t t = true_labels[i];
    const std::size_t p = predicted[i];
    if (t < 1 || t > n_classes || p < 1 || p > n_classes) {
      throw ValidationError("confuse: label pair (" + std::to_string(t) + "," +
                            std::to_string(p) + ") outside 1.." +
                            std::to_string(n_classes));
    }
    cm.at(t - 1, p - 1) += 1;
  }
  return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw ValidationError("overall_accuracy: empty matrix");
  return 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double average_accuracy(const ConfusionMatrix& cm) {
  if (cm.class_count() == 0) throw ValidationError("average_accuracy: no classes");
  double acc = 0.0;
  for (std::size_t c = 0; c < cm.class_count(); ++c) {
    const auto row = cm.row_sum(c);
    if (row == 0) {
      throw ValidationError("average_accuracy: class " + std::to_string(c + 1) +
                            " has no samples");
    }
    acc += static_cast<double>(cm.at(c, c)) / static_cast<double>(row);
  }
  return 100.0 * acc / static_cast<double>(cm.class_count());
}

double kappa(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw ValidationError("kappa: empty matrix");
  const double n = static_cast<double>(total);
  const double p_o = static_cast<double>(cm.trace()) / n;
  double p_e = 0.0;
  for (std::size_t c = 0; c < cm.class_count(); ++c) {
    p_e += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
  }
  p_e /= n * n;
  if (p_e == 1.0) {
    throw UndefinedKappaError("kappa: chance agreement is 1, kappa undefined");
  }
  return 100.0 * (p_o - p_e) / (1.0 - p_e);
}

std::vector<double> per_class_accuracy(const ConfusionMatrix& cm) {
  std::vector<double> out(cm.class_count());
  for (std::size_t c = 0; c < cm.class_count(); ++c) {
    const auto row = cm.row_sum(c);
    out[c] = row == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : 100.0 * static_cast<double>(cm.at(c, c)) /
                            static_cast<double>(row);
  }
  return out;
}

double subset_average_accuracy(const ConfusionMatrix& cm,
                               std::span<const std::size_t> classes) {
  if (classes.empty()) throw ValidationError("subset_average_accuracy: no classes");
  const auto per_class = per_class_accuracy(cm);
  double acc = 0.0;
  for (std::size_t c : classes) {
    if (c >= cm.class_count() || std::isnan(per_class[c])) {
      throw ValidationError("subset_average_accuracy: class " +
                            std::to_string(c + 1) + " has no samples");
    }
    acc += per_class[c];
  }
  return acc / static_cast<double>(classes.size());
}

MeanStd aggregate(std::span<const double> values) {
  if (values.empty()) throw ValidationError("aggregate: empty list");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

std::string format_mean_std(const MeanStd& v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f±%.2f", v.mean, v.std);
  return buf;
}

std::string confusion_csv(const ConfusionMatrix& cm,
                          std::span<const std::string> class_names) {
  if (class_names.size() != cm.class_count()) {
    throw ValidationError("confusion_csv: class name count mismatch");
  }
  std::string out = "true\\predicted";
  for (const auto& name : class_names) out += "," + name;
  out += "\n";
  for (std::size_t t = 0; t < cm.class_count(); ++t) {
    out += class_names[t];
    for (std::size_t p = 0; p < cm.class_count(); ++p)
      out += "," + std::to_string(cm.at(t, p));
    out += "\n";
  }
  return out;
}

}  // namespace hsikd
