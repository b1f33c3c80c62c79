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

// hsikd command line. Exit codes: 0 ok, 1 validation, 2 io, 3 numeric.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsikd/error.hpp"
#include "hsikd/report.hpp"
#include "hsikd/trainer.hpp"
#include "hsikd/verify.hpp"

namespace fs = std::filesystem;
using namespace hsikd;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::validation: return kExitValidation;
    case ErrorCategory::io: return kExitIo;
    case ErrorCategory::numeric: return kExitNumeric;
  }
  return kExitValidation;
}

// Tags any hsikd::Error escaping `fn` with the stage it came from.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& e)
      : Error(e.category(), stage + ": " + e.what()) {}
};

template <typename Fn>
auto stage(const std::string& name, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

struct RunFlags {
  std::string config;
  std::string cube;
  std::string out;
  std::vector<std::string> overrides;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool need_out = true) {
  cmd->add_option("--config", f.config, "JSON run config (flat RunConfig keys)");
  cmd->add_option("--cube", f.cube, "cube directory")->required();
  auto* out = cmd->add_option("--out", f.out, "output directory");
  if (need_out) out->required();
  cmd->add_option("--override", f.overrides, "key=value, repeatable")->take_all();
}

RunConfig resolve_config(const RunFlags& f) {
  return stage("config", [&] {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    for (const auto& o : f.overrides) apply_override(cfg, o);
    validate_config(cfg);
    return cfg;
  });
}

HsiCube read_cube(const std::string& dir) {
  return stage("load cube", [&] { return load_cube(dir); });
}

void make_out_dir(const fs::path& dir) {
  stage("output", [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  });
}

int cmd_synth(std::size_t classes, std::size_t size, std::size_t bands,
              std::uint64_t seed, double sigma, const std::string& out) {
  const HsiCube cube = stage("synth", [&] { return synth_cube(classes, size, bands, seed, sigma); });
  stage("write cube", [&] { write_cube(cube, out); });
  std::printf("wrote %s: %zu classes, %zux%zu, %zu bands\n", out.c_str(), cube.class_count(),
              cube.height, cube.width, cube.bands);
  return 0;
}

int cmd_train(const RunFlags& f) {
  const RunConfig cfg = resolve_config(f);
  const HsiCube cube = read_cube(f.cube);
  const ExperimentResult result = stage("train", [&] { return run_experiment(cfg, cube); });
  const Table table = class_table(result);
  stage("write run directory", [&] {
    write_run_directory(f.out, result);
    write_file(fs::path(f.out) / "accuracy.csv", render_csv(table));
  });
  std::cout << render_text(table);
  return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& cube_dir,
             const std::string& checkpoint, const std::string& out) {
  const fs::path dir(run_dir);
  const RunConfig cfg = stage("config", [&] { return load_config(dir / "config.json"); });
  const HsiCube cube = read_cube(cube_dir);
  const Checkpoint ckpt = stage("load checkpoint", [&] {
    return load_checkpoint(checkpoint.empty() ? dir / "student.ckpt" : fs::path(checkpoint));
  });
  ExperimentResult result = stage("eval", [&] {
    if (ckpt.class_names != cube.class_names) {
      throw ValidationError("checkpoint classes do not match the cube's classes");
    }
    const PreparedData data = prepare_data(cfg, cube);
    RunResult r;
    r.confusion = evaluate(ckpt.model, data.patches, cube.class_count());
    fill_rates(r, data.partition);
    ExperimentResult e;
    e.config = cfg;
    e.class_names = cube.class_names;
    e.partition = data.partition;
    const std::vector<double> oa{r.oa}, aa{r.aa}, kp{r.kappa};
    e.oa = aggregate(oa);
    e.aa = aggregate(aa);
    e.kappa = aggregate(kp);
    for (double v : r.per_class_accuracy) {
      const std::vector<double> one{v};
      e.per_class.push_back(aggregate(one));
    }
    e.runs.push_back(std::move(r));
    return e;
  });
  const Table table = class_table(result);
  if (!out.empty()) {
    make_out_dir(out);
    stage("write", [&] {
      write_file(fs::path(out) / "accuracy.csv", render_csv(table));
      write_file(fs::path(out) / "confusion_eval.csv",
                 confusion_csv(result.runs.front().confusion, result.class_names));
    });
  }
  std::cout << render_text(table);
  return 0;
}

int cmd_ablate(const RunFlags& f) {
  const RunConfig cfg = resolve_config(f);
  const HsiCube cube = read_cube(f.cube);
  const auto rows = stage("ablate", [&] { return run_ablation(cfg, cube); });
  const Table table = ablation_table(rows);
  make_out_dir(f.out);
  stage("write", [&] { write_file(fs::path(f.out) / "ablation.csv", render_csv(table)); });
  std::cout << render_text(table);
  return 0;
}

int cmd_sweep(const RunFlags& f, const std::vector<std::size_t>& sizes) {
  const RunConfig cfg = resolve_config(f);
  const HsiCube cube = read_cube(f.cube);
  const auto rows = stage("sweep", [&] { return run_patch_sweep(cfg, cube, sizes); });
  const Table table = sweep_table(rows);
  make_out_dir(f.out);
  stage("write", [&] { write_file(fs::path(f.out) / "sweep.csv", render_csv(table)); });
  std::cout << render_text(table);
  return 0;
}

int print_reports(const std::vector<VerifyReport>& reports) {
  bool ok = true;
  for (const auto& r : reports) {
    std::printf("%-24s %s  cases %zu  max error %.3e (tolerance %.0e)\n", r.name.c_str(),
                r.passed() ? "PASS" : "FAIL", r.cases, r.max_error, r.tolerance);
    if (!r.passed()) {
      ok = false;
      const std::size_t shown = std::min<std::size_t>(r.failing_seeds.size(), 5);
      std::printf("  %zu failing case(s); seeds:", r.failing_seeds.size());
      for (std::size_t i = 0; i < shown; ++i)
        std::printf(" %llu", static_cast<unsigned long long>(r.failing_seeds[i]));
      std::printf("%s\n", r.failing_seeds.size() > shown ? " ..." : "");
    }
  }
  return ok ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Class-incremental hyperspectral classification with masked distillation"};
  app.require_subcommand(1);

  std::size_t classes = 8, size = 64, bands = 32;
  std::uint64_t seed = 42;
  double sigma = 0.02;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic cube");
  synth->add_option("--classes", classes, "number of classes")->capture_default_str();
  synth->add_option("--size", size, "image height and width")->capture_default_str();
  synth->add_option("--bands", bands, "spectral bands")->capture_default_str();
  synth->add_option("--seed", seed, "generator seed")->capture_default_str();
  synth->add_option("--sigma", sigma, "per-band noise std")->capture_default_str();
  synth->add_option("--out", synth_out, "cube directory")->required();

  RunFlags train_flags, ablate_flags, sweep_flags;
  auto* train = app.add_subcommand("train", "two-phase training over all runs");
  add_run_flags(train, train_flags);
  auto* ablate = app.add_subcommand("ablate", "review/mask ablation table");
  add_run_flags(ablate, ablate_flags);
  std::vector<std::size_t> sizes{7, 9, 11, 13};
  auto* sweep = app.add_subcommand("sweep-patch", "accuracy versus patch size");
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--sizes", sizes, "odd patch sizes")->delimiter(',')->capture_default_str();

  std::string eval_run, eval_cube, eval_ckpt, eval_out;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on every labeled pixel");
  eval->add_option("--run", eval_run, "run directory (config.json, student.ckpt)")->required();
  eval->add_option("--cube", eval_cube, "cube directory")->required();
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint (default <run>/student.ckpt)");
  eval->add_option("--out", eval_out, "directory for accuracy.csv and confusion_eval.csv");

  VerifyOptions grad_opt, loss_opt;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  auto* losses = app.add_subcommand("verify-losses", "KL decomposition and mask suite");
  for (auto [cmd, opt] : {std::pair{grad, &grad_opt}, std::pair{losses, &loss_opt}}) {
    cmd->add_option("--seed", opt->seed, "suite seed")->capture_default_str();
    cmd->add_option("--cases", opt->cases, "number of cases")->capture_default_str();
    cmd->add_flag("--inject-bug", opt->inject_bug, "corrupt the checked quantity (test hook)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth) return cmd_synth(classes, size, bands, seed, sigma, synth_out);
    if (*train) return cmd_train(train_flags);
    if (*ablate) return cmd_ablate(ablate_flags);
    if (*sweep) return cmd_sweep(sweep_flags, sizes);
    if (*eval) return cmd_eval(eval_run, eval_cube, eval_ckpt, eval_out);
    if (*grad) return print_reports(gradcheck(grad_opt));
    if (*losses) return print_reports(verify_losses(loss_opt));
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitValidation;
}
