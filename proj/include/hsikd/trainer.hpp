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

// Two-phase class-incremental pipeline.
//
//   base phase:         teacher <- seeded init, CE on base-class samples
//   incremental phase:  student <- copy of teacher; optional relabeling of
//                       new-class samples by the frozen teacher; loss is
//                       CE(effective labels) + lambda T^2 KD(teacher||student)
//
// Base-phase training data is discarded after phase one: the student never
// sees a stored base-class sample.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hsikd/data.hpp"
#include "hsikd/distill.hpp"
#include "hsikd/metrics.hpp"
#include "hsikd/net.hpp"
#include "hsikd/retention.hpp"

namespace hsikd {

struct RunConfig {
  std::size_t patch_size = 9;
  std::size_t pca_components = 20;
  std::vector<std::size_t> hidden_dims{256, 128};
  double lr = 1e-4;
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  double alpha = 0.8;
  double temperature = 2.0;
  double lambda_kd = 1.0;
  double train_fraction = 0.1;
  // Class names; both empty means the first half of the cube's classes
  // (rounded down) is the base set.
  std::vector<std::string> base_classes;
  std::vector<std::string> incremental_classes;
  std::uint64_t seed = 0;
  std::size_t runs = 5;
  bool review_enabled = true;
  bool mask_enabled = true;

  bool operator==(const RunConfig&) const = default;
};

void validate_config(const RunConfig& cfg);

ClassPartition resolve_partition(const RunConfig& cfg,
                                 const std::vector<std::string>& class_names);

// Flat JSON with one key per RunConfig field. Unknown keys are rejected.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// "key=value"; lists are comma-separated, flags accept true/false/1/0.
void apply_override(RunConfig& cfg, const std::string& assignment);

struct TrainedModel {
  MlpModel model;
  std::vector<double> epoch_losses;
};

TrainedModel train_base(const PatchSet& data, const RunConfig& cfg,
                        const ClassPartition& part, std::uint64_t seed);

struct IncrementalResult {
  MlpModel student;
  std::vector<double> epoch_losses;
  std::vector<RelabelDecision> relabels;  // empty when review is off
  std::size_t relabel_count = 0;
};

IncrementalResult train_incremental(const MlpModel& teacher,
                                    const PatchSet& data, const RunConfig& cfg,
                                    const ClassPartition& part,
                                    std::uint64_t seed);

// Argmax predictions (1-based, ties to the lowest index).
std::vector<std::size_t> predict_labels(const MlpModel& model,
                                        const Matrix& samples);

ConfusionMatrix evaluate(const MlpModel& model, const PatchSet& test,
                         std::size_t n_classes);

struct RunResult {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  ConfusionMatrix confusion;
  std::vector<double> per_class_accuracy;  // percent, by class index
  double oa = 0.0, aa = 0.0, kappa = 0.0;  // percent
  double base_aa = 0.0, incremental_aa = 0.0;
  std::vector<double> base_history;         // per-epoch mean loss
  std::vector<double> incremental_history;
  std::size_t relabel_count = 0;
  std::vector<RelabelDecision> relabels;
  MlpModel teacher;
  MlpModel student;
};

// Recomputes the rates of `r` from r.confusion.
void fill_rates(RunResult& r, const ClassPartition& part);

struct ExperimentResult {
  RunConfig config;
  std::vector<std::string> class_names;
  ClassPartition partition;
  std::vector<RunResult> runs;
  MeanStd oa, aa, kappa, base_aa, incremental_aa;
  std::vector<MeanStd> per_class;
};

// Data shared by every run of an experiment: the PCA fit on the whole cube
// and every labeled pixel's patch.
struct PreparedData {
  std::vector<std::string> class_names;
  ClassPartition partition;
  PcaModel pca;
  PatchSet patches;
};

PreparedData prepare_data(const RunConfig& cfg, const HsiCube& cube);

// One full run (split, base phase, incremental phase, evaluation) with seed
// cfg.seed + run_index. A supplied teacher skips the base phase; it must be
// the teacher this run would have trained.
RunResult run_once(const PreparedData& data, const RunConfig& cfg,
                   std::size_t run_index,
                   const MlpModel* teacher = nullptr,
                   const std::vector<double>* teacher_history = nullptr);

ExperimentResult run_experiment(const RunConfig& cfg, const HsiCube& cube);

struct AblationRow {
  bool review = false;
  bool mask = false;
  ExperimentResult result;
};

// Rows in order: baseline, +review, +mask, +both. All rows share seeds and
// teachers.
std::vector<AblationRow> run_ablation(const RunConfig& cfg, const HsiCube& cube);

struct SweepRow {
  std::size_t patch_size = 0;
  MeanStd oa;
  double seconds = 0.0;
  ExperimentResult result;
};

std::vector<SweepRow> run_patch_sweep(const RunConfig& cfg, const HsiCube& cube,
                                      const std::vector<std::size_t>& sizes);

// Worker count for independent runs: HSIKD_THREADS if set, else hardware
// concurrency.
std::size_t worker_count();

// Run directory: config.json, teacher.ckpt, student.ckpt (run 0),
// relabels.csv, metrics.json, confusion_<run>.csv, history_<run>.csv.
std::string metrics_json(const ExperimentResult& result);
void write_run_directory(const std::filesystem::path& dir,
                         const ExperimentResult& result);

}  // namespace hsikd
