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

// Teacher-based relabeling of incremental-phase samples.
//
// The frozen teacher scores each new-class sample against the base classes
// (softmax over P only). A sample whose best base score reaches alpha takes
// that base label for the incremental phase, so the student keeps seeing
// base-class targets without any stored old-class data.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hsikd/data.hpp"
#include "hsikd/distill.hpp"
#include "hsikd/net.hpp"

namespace hsikd {

struct RetentionConfig {
  double alpha = 0.8;
  bool enabled = true;
};

struct RelabelDecision {
  std::size_t sample_index = 0;
  std::size_t original_label = 0;   // 1-based, in N
  std::size_t effective_label = 0;  // 1-based, in D
  double teacher_score = 0.0;
  bool relabeled = false;

  bool operator==(const RelabelDecision&) const = default;
};

struct BaseScore {
  std::size_t best_base_label = 0;  // 1-based
  double score = 0.0;               // renormalized probability over P
};

// From precomputed teacher logits. Ties go to the lowest class index.
BaseScore score_base_logits(std::span<const double> teacher_logits,
                            const ClassPartition& part);

BaseScore score_against_base(const MlpModel& teacher,
                             std::span<const double> sample,
                             const ClassPartition& part);

// One decision per sample, input order. Score >= alpha relabels.
std::vector<RelabelDecision> relabel_dataset(const MlpModel& teacher,
                                             const PatchSet& samples,
                                             const ClassPartition& part,
                                             const RetentionConfig& cfg);

// Same, reusing teacher logits already computed for `samples`.
std::vector<RelabelDecision> relabel_from_logits(const Matrix& teacher_logits,
                                                 const PatchSet& samples,
                                                 const ClassPartition& part,
                                                 const RetentionConfig& cfg);

// Audit CSV of relabeled samples only:
// run,sample_index,original_label,effective_label,score
std::string relabel_csv_header();
std::string relabel_csv_rows(std::span<const RelabelDecision> decisions,
                             std::size_t run);

}  // namespace hsikd
