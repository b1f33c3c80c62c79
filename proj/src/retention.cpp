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

#include "hsikd/retention.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "hsikd/error.hpp"

namespace hsikd {

BaseScore score_base_logits(std::span<const double> teacher_logits,
                            const ClassPartition& part) {
  if (teacher_logits.size() != part.class_count()) {
    throw DimensionError("score_base_logits: " +
                         std::to_string(teacher_logits.size()) +
                         " logits for " + std::to_string(part.class_count()) +
                         " classes");
  }
  const auto& base = part.base();
  double mx = -std::numeric_limits<double>::infinity();
  std::size_t best = base.front();
  for (std::size_t k : base) {
    if (teacher_logits[k] > mx) {
      mx = teacher_logits[k];
      best = k;
    }
  }
  double denom = 0.0;
  for (std::size_t k : base) denom += std::exp(teacher_logits[k] - mx);
  return {best + 1, 1.0 / denom};
}

BaseScore score_against_base(const MlpModel& teacher,
                             std::span<const double> sample,
                             const ClassPartition& part) {
  if (sample.size() != teacher.input_dim()) {
    throw DimensionError("score_against_base: sample has " +
                         std::to_string(sample.size()) + " features, teacher " +
                         "expects " + std::to_string(teacher.input_dim()));
  }
  Matrix x(1, sample.size(), std::vector<double>(sample.begin(), sample.end()));
  Matrix z = predict_logits(teacher, x);
  return score_base_logits(z.row(0), part);
}

std::vector<RelabelDecision> relabel_from_logits(const Matrix& teacher_logits,
                                                 const PatchSet& samples,
                                                 const ClassPartition& part,
                                                 const RetentionConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ValidationError("relabel: alpha must be in (0, 1)");
  }
  if (teacher_logits.rows() != samples.size()) {
    throw DimensionError("relabel: teacher logits rows do not match samples");
  }
  std::vector<RelabelDecision> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t label = samples.labels[i];
    if (label < 1 || !part.is_incremental(label - 1)) {
      throw ValidationError("relabel: sample " + std::to_string(i) +
                            " has label " + std::to_string(label) +
                            ", which is not an incremental class");
    }
    RelabelDecision d;
    d.sample_index = i;
    d.original_label = label;
    d.effective_label = label;
    const BaseScore s = score_base_logits(teacher_logits.row(i), part);
    d.teacher_score = s.score;
    if (cfg.enabled && s.score >= cfg.alpha) {
      d.effective_label = s.best_base_label;
      d.relabeled = true;
    }
    out.push_back(d);
  }
  return out;
}

std::vector<RelabelDecision> relabel_dataset(const MlpModel& teacher,
                                             const PatchSet& samples,
                                             const ClassPartition& part,
                                             const RetentionConfig& cfg) {
  if (samples.size() > 0 && samples.feature_dim() != teacher.input_dim()) {
    throw DimensionError("relabel_dataset: samples have " +
                         std::to_string(samples.feature_dim()) +
                         " features, teacher expects " +
                         std::to_string(teacher.input_dim()));
  }
  const Matrix logits = samples.size() == 0
                            ? Matrix(0, teacher.output_dim())
                            : predict_logits(teacher, samples.patches);
  return relabel_from_logits(logits, samples, part, cfg);
}

std::string relabel_csv_header() {
  return "run,sample_index,original_label,effective_label,score\n";
}

std::string relabel_csv_rows(std::span<const RelabelDecision> decisions,
                             std::size_t run) {
  std::string out;
  char buf[160];
  for (const auto& d : decisions) {
    if (!d.relabeled) continue;
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%zu,%.17g\n", run,
                  d.sample_index, d.original_label, d.effective_label,
                  d.teacher_score);
    out += buf;
  }
  return out;
}

}  // namespace hsikd
