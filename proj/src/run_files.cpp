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

// Config parsing and run-directory output.

#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "hsikd/error.hpp"
#include "hsikd/trainer.hpp"

namespace hsikd {

namespace {

using nlohmann::json;

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{
      "patch_size",   "pca_components", "hidden_dims",     "lr",
      "epochs",       "batch_size",     "alpha",           "temperature",
      "lambda_kd",    "train_fraction", "base_classes",    "incremental_classes",
      "seed",         "runs",           "review_enabled",  "mask_enabled"};
  return keys;
}

json config_to_object(const RunConfig& c) {
  json j;
  j["patch_size"] = c.patch_size;
  j["pca_components"] = c.pca_components;
  j["hidden_dims"] = c.hidden_dims;
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["alpha"] = c.alpha;
  j["temperature"] = c.temperature;
  j["lambda_kd"] = c.lambda_kd;
  j["train_fraction"] = c.train_fraction;
  j["base_classes"] = c.base_classes;
  j["incremental_classes"] = c.incremental_classes;
  j["seed"] = c.seed;
  j["runs"] = c.runs;
  j["review_enabled"] = c.review_enabled;
  j["mask_enabled"] = c.mask_enabled;
  return j;
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

[[noreturn]] void bad_override(const std::string& key, const std::string& value,
                               const char* expected) {
  throw ValidationError("override " + key + "=" + value + ": expected " + expected);
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    bad_override(key, v, "a non-negative integer");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  double out = 0.0;
  in >> out;
  if (v.empty() || in.fail() || !in.eof()) bad_override(key, v, "a number");
  return out;
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_override(key, v, "true/false/1/0");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (v.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = v.find(',', start);
    out.push_back(v.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

json mean_std_json(const MeanStd& v) { return json{{"mean", v.mean}, {"std", v.std}}; }

std::string history_csv(const RunResult& r) {
  std::string out = "epoch,phase,loss\n";
  char buf[96];
  auto emit = [&](const std::vector<double>& h, const char* phase) {
    for (std::size_t e = 0; e < h.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%zu,%s,%.17g\n", e + 1, phase, h[e]);
      out += buf;
    }
  };
  emit(r.base_history, "base");
  emit(r.incremental_history, "incremental");
  return out;
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) {
  return config_to_object(cfg).dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!config_keys().count(key)) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  RunConfig c;
  read_key(j, "patch_size", c.patch_size);
  read_key(j, "pca_components", c.pca_components);
  read_key(j, "hidden_dims", c.hidden_dims);
  read_key(j, "lr", c.lr);
  read_key(j, "epochs", c.epochs);
  read_key(j, "batch_size", c.batch_size);
  read_key(j, "alpha", c.alpha);
  read_key(j, "temperature", c.temperature);
  read_key(j, "lambda_kd", c.lambda_kd);
  read_key(j, "train_fraction", c.train_fraction);
  read_key(j, "base_classes", c.base_classes);
  read_key(j, "incremental_classes", c.incremental_classes);
  read_key(j, "seed", c.seed);
  read_key(j, "runs", c.runs);
  read_key(j, "review_enabled", c.review_enabled);
  read_key(j, "mask_enabled", c.mask_enabled);
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return config_from_json(std::string(bytes.begin(), bytes.end()));
}

void apply_override(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string v = assignment.substr(eq + 1);
  if (!config_keys().count(key)) {
    throw ValidationError("override: unknown key '" + key + "'");
  }
  if (key == "patch_size") c.patch_size = parse_count(key, v);
  else if (key == "pca_components") c.pca_components = parse_count(key, v);
  else if (key == "epochs") c.epochs = parse_count(key, v);
  else if (key == "batch_size") c.batch_size = parse_count(key, v);
  else if (key == "runs") c.runs = parse_count(key, v);
  else if (key == "seed") c.seed = parse_count(key, v);
  else if (key == "lr") c.lr = parse_real(key, v);
  else if (key == "alpha") c.alpha = parse_real(key, v);
  else if (key == "temperature") c.temperature = parse_real(key, v);
  else if (key == "lambda_kd") c.lambda_kd = parse_real(key, v);
  else if (key == "train_fraction") c.train_fraction = parse_real(key, v);
  else if (key == "review_enabled") c.review_enabled = parse_flag(key, v);
  else if (key == "mask_enabled") c.mask_enabled = parse_flag(key, v);
  else if (key == "base_classes") c.base_classes = split_list(v);
  else if (key == "incremental_classes") c.incremental_classes = split_list(v);
  else if (key == "hidden_dims") {
    c.hidden_dims.clear();
    for (const auto& item : split_list(v)) c.hidden_dims.push_back(parse_count(key, item));
  }
}

std::string metrics_json(const ExperimentResult& result) {
  const auto& names = result.class_names;
  json runs = json::array();
  for (const auto& r : result.runs) {
    json per_class = json::object();
    for (std::size_t c = 0; c < names.size(); ++c) per_class[names[c]] = r.per_class_accuracy[c];
    runs.push_back({{"run", r.run_index},
                    {"seed", r.seed},
                    {"oa", r.oa},
                    {"aa", r.aa},
                    {"kappa", r.kappa},
                    {"base_aa", r.base_aa},
                    {"incremental_aa", r.incremental_aa},
                    {"relabel_count", r.relabel_count},
                    {"per_class", per_class}});
  }
  json per_class = json::object();
  for (std::size_t c = 0; c < names.size(); ++c) per_class[names[c]] = mean_std_json(result.per_class[c]);
  json base = json::array(), incr = json::array();
  for (auto k : result.partition.base()) base.push_back(names[k]);
  for (auto k : result.partition.incremental()) incr.push_back(names[k]);
  json j{{"runs", runs},
         {"aggregate",
          {{"oa", mean_std_json(result.oa)},
           {"aa", mean_std_json(result.aa)},
           {"kappa", mean_std_json(result.kappa)},
           {"base_aa", mean_std_json(result.base_aa)},
           {"incremental_aa", mean_std_json(result.incremental_aa)},
           {"per_class", per_class}}},
         {"base_classes", base},
         {"incremental_classes", incr}};
  return j.dump(2) + "\n";
}

void write_run_directory(const std::filesystem::path& dir,
                         const ExperimentResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  // The resolved config names its classes explicitly.
  RunConfig resolved = result.config;
  resolved.base_classes.clear();
  resolved.incremental_classes.clear();
  for (auto k : result.partition.base()) resolved.base_classes.push_back(result.class_names[k]);
  for (auto k : result.partition.incremental())
    resolved.incremental_classes.push_back(result.class_names[k]);
  detail::write_text(dir / "config.json", config_to_json(resolved));

  if (!result.runs.empty()) {
    save_checkpoint(dir / "teacher.ckpt", result.runs.front().teacher, result.class_names);
    save_checkpoint(dir / "student.ckpt", result.runs.front().student, result.class_names);
  }
  std::string relabels = relabel_csv_header();
  for (const auto& r : result.runs) relabels += relabel_csv_rows(r.relabels, r.run_index);
  detail::write_text(dir / "relabels.csv", relabels);
  detail::write_text(dir / "metrics.json", metrics_json(result));
  for (const auto& r : result.runs) {
    const std::string idx = std::to_string(r.run_index);
    detail::write_text(dir / ("confusion_" + idx + ".csv"),
                       confusion_csv(r.confusion, result.class_names));
    detail::write_text(dir / ("history_" + idx + ".csv"), history_csv(r));
  }
}

}  // namespace hsikd
