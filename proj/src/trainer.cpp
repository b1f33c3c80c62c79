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

#include "hsikd/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "hsikd/error.hpp"
#include "hsikd/rng.hpp"

namespace hsikd {

namespace {

// Stream ids for derive_seed(run_seed, stream).
enum SeedStream : std::uint64_t {
  kSplitStream = 0,
  kInitStream = 1,
  kBaseShuffleStream = 2,
  kIncrementalShuffleStream = 3,
};

std::vector<std::size_t> layer_dims(const RunConfig& cfg, std::size_t input,
                                    std::size_t n_classes) {
  std::vector<std::size_t> dims{input};
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(n_classes);
  return dims;
}

// Shuffled minibatch Adam. `teacher_logits` is empty in the base phase.
// Returns the sample-weighted mean loss of each epoch.
std::vector<double> fit(MlpModel& model, const Matrix& x,
                        const std::vector<std::size_t>& targets,
                        const Matrix& teacher_logits,
                        const ClassPartition& part, const DistillConfig& dcfg,
                        Phase phase, const RunConfig& cfg,
                        std::uint64_t shuffle_seed) {
  const std::size_t n = x.rows();
  AdamState adam = AdamState::for_model(model);
  Rng rng(shuffle_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> history;
  history.reserve(cfg.epochs);
  const char* phase_name = phase == Phase::base ? "base" : "incremental";

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double weighted = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      std::span<const std::size_t> idx(order.data() + start, stop - start);
      Matrix xb = gather_rows(x, idx);
      std::vector<std::size_t> yb;
      yb.reserve(idx.size());
      for (std::size_t i : idx) yb.push_back(targets[i]);
      Matrix tb = teacher_logits.empty() ? Matrix() : gather_rows(teacher_logits, idx);

      ForwardResult fr = forward(model, xb);
      LossAndGrad lg = loss_grads(tb, fr.logits, yb, part, dcfg, phase);
      if (!std::isfinite(lg.loss)) {
        throw NumericError(std::string(phase_name) + " phase: non-finite loss at epoch " +
                           std::to_string(epoch + 1) + ", batch starting at " +
                           std::to_string(start));
      }
      GradientSet grads = backward(model, fr.cache, lg.d_student);
      adam_step(model, grads, adam, cfg.lr);
      weighted += lg.loss * static_cast<double>(idx.size());
    }
    history.push_back(weighted / static_cast<double>(n));
  }
  return history;
}

void check_labels_in(const PatchSet& data, const ClassPartition& part,
                     bool base, const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t l = data.labels[i];
    const bool ok = l >= 1 && (base ? part.is_base(l - 1) : part.is_incremental(l - 1));
    if (!ok) {
      throw ValidationError(std::string(what) + ": sample " + std::to_string(i) +
                            " has label " + std::to_string(l) + " outside " +
                            (base ? "the base set" : "the incremental set"));
    }
  }
}

}  // namespace

void validate_config(const RunConfig& cfg) {
  if (cfg.epochs < 1) throw ValidationError("config: epochs must be >= 1");
  if (cfg.batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
  if (cfg.runs < 1) throw ValidationError("config: runs must be >= 1");
  if (cfg.patch_size % 2 == 0 || cfg.patch_size < 3) {
    throw ValidationError("config: patch_size must be odd and >= 3");
  }
  if (cfg.pca_components < 1) throw ValidationError("config: pca_components must be >= 1");
  if (!(cfg.lr > 0.0)) throw ValidationError("config: lr must be > 0");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ValidationError("config: alpha must be in (0, 1)");
  }
  if (!(cfg.temperature > 0.0)) throw ValidationError("config: temperature must be > 0");
  if (!(cfg.lambda_kd >= 0.0)) throw ValidationError("config: lambda_kd must be >= 0");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw ValidationError("config: train_fraction must be in (0, 1)");
  }
  for (std::size_t h : cfg.hidden_dims) {
    if (h == 0) throw ValidationError("config: hidden layer of width 0");
  }
}

ClassPartition resolve_partition(const RunConfig& cfg,
                                 const std::vector<std::string>& class_names) {
  const std::size_t n = class_names.size();
  if (cfg.base_classes.empty() && cfg.incremental_classes.empty()) {
    std::vector<std::size_t> base(n / 2);
    std::iota(base.begin(), base.end(), std::size_t{0});
    return ClassPartition(n, base);
  }
  auto index_of = [&](const std::string& name) {
    auto it = std::find(class_names.begin(), class_names.end(), name);
    if (it == class_names.end()) {
      throw ValidationError("config: unknown class '" + name + "'");
    }
    return static_cast<std::size_t>(it - class_names.begin());
  };
  std::vector<std::size_t> base;
  std::vector<bool> seen(n, false);
  for (const auto& name : cfg.base_classes) {
    const auto i = index_of(name);
    base.push_back(i);
    seen[i] = true;
  }
  for (const auto& name : cfg.incremental_classes) {
    const auto i = index_of(name);
    if (seen[i]) {
      throw ValidationError("config: class '" + name + "' is in both sets");
    }
    seen[i] = true;
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (!seen[c]) {
      throw ValidationError("config: class '" + class_names[c] +
                            "' is in neither base_classes nor incremental_classes");
    }
  }
  return ClassPartition(n, base);
}

TrainedModel train_base(const PatchSet& data, const RunConfig& cfg,
                        const ClassPartition& part, std::uint64_t seed) {
  validate_config(cfg);
  if (data.size() == 0) throw ValidationError("train_base: no training samples");
  check_labels_in(data, part, true, "train_base");

  TrainedModel out;
  const auto dims = layer_dims(cfg, data.feature_dim(), part.class_count());
  out.model = init_mlp(dims, derive_seed(seed, kInitStream));
  std::vector<std::size_t> targets;
  for (std::size_t l : data.labels) targets.push_back(l - 1);
  out.epoch_losses = fit(out.model, data.patches, targets, Matrix(), part,
                         DistillConfig{}, Phase::base, cfg,
                         derive_seed(seed, kBaseShuffleStream));
  return out;
}

IncrementalResult train_incremental(const MlpModel& teacher,
                                    const PatchSet& data, const RunConfig& cfg,
                                    const ClassPartition& part,
                                    std::uint64_t seed) {
  validate_config(cfg);
  if (data.size() == 0) {
    throw ValidationError("train_incremental: no training samples");
  }
  if (data.feature_dim() != teacher.input_dim() ||
      teacher.output_dim() != part.class_count()) {
    throw ValidationError("train_incremental: teacher is " +
                          std::to_string(teacher.input_dim()) + "->" +
                          std::to_string(teacher.output_dim()) + ", data has " +
                          std::to_string(data.feature_dim()) + " features and " +
                          std::to_string(part.class_count()) + " classes");
  }
  check_labels_in(data, part, false, "train_incremental");

  IncrementalResult out;
  out.student = clone_params(teacher);
  // The teacher is frozen, so its logits are computed once.
  const Matrix teacher_logits = predict_logits(teacher, data.patches);

  std::vector<std::size_t> targets;
  targets.reserve(data.size());
  if (cfg.review_enabled) {
    out.relabels = relabel_from_logits(teacher_logits, data, part,
                                       RetentionConfig{cfg.alpha, true});
    for (const auto& d : out.relabels) {
      targets.push_back(d.effective_label - 1);
      out.relabel_count += d.relabeled;
    }
  } else {
    for (std::size_t l : data.labels) targets.push_back(l - 1);
  }

  const DistillConfig dcfg{cfg.temperature, cfg.lambda_kd, cfg.mask_enabled};
  out.epoch_losses = fit(out.student, data.patches, targets, teacher_logits, part,
                         dcfg, Phase::incremental, cfg,
                         derive_seed(seed, kIncrementalShuffleStream));
  return out;
}

std::vector<std::size_t> predict_labels(const MlpModel& model,
                                        const Matrix& samples) {
  std::vector<std::size_t> out;
  out.reserve(samples.rows());
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < samples.rows(); start += kChunk) {
    const std::size_t stop = std::min(samples.rows(), start + kChunk);
    std::vector<std::size_t> idx(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const Matrix z = predict_logits(model, gather_rows(samples, idx));
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      const auto best = std::max_element(row.begin(), row.end()) - row.begin();
      out.push_back(static_cast<std::size_t>(best) + 1);
    }
  }
  return out;
}

ConfusionMatrix evaluate(const MlpModel& model, const PatchSet& test,
                         std::size_t n_classes) {
  const auto predicted = predict_labels(model, test.patches);
  return confuse(test.labels, predicted, n_classes);
}

void fill_rates(RunResult& r, const ClassPartition& part) {
  r.per_class_accuracy = per_class_accuracy(r.confusion);
  r.oa = overall_accuracy(r.confusion);
  r.aa = average_accuracy(r.confusion);
  r.kappa = kappa(r.confusion);
  r.base_aa = subset_average_accuracy(r.confusion, part.base());
  r.incremental_aa = subset_average_accuracy(r.confusion, part.incremental());
}

PreparedData prepare_data(const RunConfig& cfg, const HsiCube& cube) {
  validate_config(cfg);
  validate_cube(cube);
  PreparedData d;
  d.class_names = cube.class_names;
  d.partition = resolve_partition(cfg, cube.class_names);
  if (cfg.pca_components > cube.bands) {
    throw ValidationError("config: pca_components " +
                          std::to_string(cfg.pca_components) + " exceeds " +
                          std::to_string(cube.bands) + " bands");
  }
  d.pca = fit_cube_pca(cube, cfg.pca_components);
  d.patches = slice_patches(cube, d.pca, cfg.patch_size);
  return d;
}

RunResult run_once(const PreparedData& data, const RunConfig& cfg,
                   std::size_t run_index, const MlpModel* teacher,
                   const std::vector<double>* teacher_history) {
  RunResult r;
  r.run_index = run_index;
  r.seed = cfg.seed + run_index;
  const PhaseSplit parts =
      split(data.patches, SplitSpec{cfg.train_fraction,
                                    derive_seed(r.seed, kSplitStream),
                                    data.partition});
  if (teacher) {
    r.teacher = *teacher;
    if (teacher_history) r.base_history = *teacher_history;
  } else {
    TrainedModel t = train_base(parts.base_train, cfg, data.partition, r.seed);
    r.teacher = std::move(t.model);
    r.base_history = std::move(t.epoch_losses);
  }
  IncrementalResult inc =
      train_incremental(r.teacher, parts.incr_train, cfg, data.partition, r.seed);
  r.student = std::move(inc.student);
  r.incremental_history = std::move(inc.epoch_losses);
  r.relabels = std::move(inc.relabels);
  r.relabel_count = inc.relabel_count;

  r.confusion = ConfusionMatrix(data.partition.class_count());
  for (const PatchSet* test : {&parts.base_test, &parts.incr_test}) {
    const ConfusionMatrix cm = evaluate(r.student, *test, data.partition.class_count());
    for (std::size_t t = 0; t < cm.class_count(); ++t)
      for (std::size_t p = 0; p < cm.class_count(); ++p) r.confusion.at(t, p) += cm.at(t, p);
  }
  fill_rates(r, data.partition);
  return r;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("HSIKD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs job(i) for i in [0, n) on up to worker_count() threads. Results are
// written by index, so scheduling order never affects output. The first
// exception (lowest index) is rethrown.
template <typename Job>
void parallel_for(std::size_t n, Job job) {
  const std::size_t workers = std::min(n, worker_count());
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            job(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ExperimentResult summarize(const RunConfig& cfg, const PreparedData& data,
                           std::vector<RunResult> runs) {
  ExperimentResult out;
  out.config = cfg;
  out.class_names = data.class_names;
  out.partition = data.partition;
  out.runs = std::move(runs);
  auto collect = [&](auto field) {
    std::vector<double> v;
    for (const auto& r : out.runs) v.push_back(field(r));
    return aggregate(v);
  };
  out.oa = collect([](const RunResult& r) { return r.oa; });
  out.aa = collect([](const RunResult& r) { return r.aa; });
  out.kappa = collect([](const RunResult& r) { return r.kappa; });
  out.base_aa = collect([](const RunResult& r) { return r.base_aa; });
  out.incremental_aa = collect([](const RunResult& r) { return r.incremental_aa; });
  for (std::size_t c = 0; c < data.class_names.size(); ++c) {
    out.per_class.push_back(
        collect([c](const RunResult& r) { return r.per_class_accuracy[c]; }));
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, const HsiCube& cube) {
  const PreparedData data = prepare_data(cfg, cube);
  std::vector<RunResult> runs(cfg.runs);
  parallel_for(cfg.runs, [&](std::size_t r) { runs[r] = run_once(data, cfg, r); });
  return summarize(cfg, data, std::move(runs));
}

std::vector<AblationRow> run_ablation(const RunConfig& cfg, const HsiCube& cube) {
  const PreparedData data = prepare_data(cfg, cube);
  const std::vector<std::pair<bool, bool>> variants{
      {false, false}, {true, false}, {false, true}, {true, true}};
  // Flags only affect the incremental phase, so each run's teacher is trained
  // once and shared by all four variants.
  std::vector<std::vector<RunResult>> results(variants.size(),
                                              std::vector<RunResult>(cfg.runs));
  parallel_for(cfg.runs, [&](std::size_t r) {
    RunConfig first = cfg;
    first.review_enabled = variants[0].first;
    first.mask_enabled = variants[0].second;
    results[0][r] = run_once(data, first, r);
    for (std::size_t v = 1; v < variants.size(); ++v) {
      RunConfig c = cfg;
      c.review_enabled = variants[v].first;
      c.mask_enabled = variants[v].second;
      results[v][r] = run_once(data, c, r, &results[0][r].teacher,
                               &results[0][r].base_history);
    }
  });
  std::vector<AblationRow> rows;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    RunConfig c = cfg;
    c.review_enabled = variants[v].first;
    c.mask_enabled = variants[v].second;
    rows.push_back({variants[v].first, variants[v].second,
                    summarize(c, data, std::move(results[v]))});
  }
  return rows;
}

std::vector<SweepRow> run_patch_sweep(const RunConfig& cfg, const HsiCube& cube,
                                      const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) throw ValidationError("sweep: no patch sizes given");
  for (std::size_t s : sizes) {
    if (s % 2 == 0) {
      throw ValidationError("sweep: patch size " + std::to_string(s) +
                            " must be odd");
    }
  }
  std::vector<SweepRow> rows;
  for (std::size_t s : sizes) {
    RunConfig c = cfg;
    c.patch_size = s;
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.patch_size = s;
    row.result = run_experiment(c, cube);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.oa = row.result.oa;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hsikd
