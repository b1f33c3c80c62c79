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

#include "hsikd/data.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "binary_io.hpp"
#include "hsikd/error.hpp"
#include "hsikd/rng.hpp"

namespace hsikd {

namespace fs = std::filesystem;

void validate_cube(const HsiCube& cube) {
  const std::size_t pixels = cube.height * cube.width;
  if (cube.height == 0 || cube.width == 0 || cube.bands == 0) {
    throw FormatError("cube '" + cube.name + "' has a zero dimension");
  }
  if (cube.values.size() != pixels * cube.bands) {
    throw FormatError("cube '" + cube.name + "' has " +
                      std::to_string(cube.values.size()) + " values, expected " +
                      std::to_string(pixels * cube.bands));
  }
  if (cube.labels.size() != pixels) {
    throw FormatError("cube '" + cube.name + "' has " +
                      std::to_string(cube.labels.size()) + " labels, expected " +
                      std::to_string(pixels));
  }
  const auto n_classes = static_cast<std::int64_t>(cube.class_names.size());
  std::vector<std::size_t> counts(cube.class_names.size() + 1, 0);
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::int32_t l = cube.labels[i];
    if (l < 0 || l > n_classes) {
      throw FormatError("cube '" + cube.name + "': label " + std::to_string(l) +
                        " at pixel " + std::to_string(i) + " outside 0.." +
                        std::to_string(n_classes));
    }
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw FormatError("cube '" + cube.name + "': class " + std::to_string(c) +
                        " (" + cube.class_names[c - 1] + ") has no pixels");
    }
  }
  for (float v : cube.values) {
    if (!std::isfinite(v)) {
      throw FormatError("cube '" + cube.name + "' contains non-finite values");
    }
  }
}

void write_cube(const HsiCube& cube, const fs::path& dir) {
  validate_cube(cube);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json meta = {
      {"name", cube.name},         {"height", cube.height},
      {"width", cube.width},       {"bands", cube.bands},
      {"classes", cube.class_names}, {"dtype", "f32le"},
      {"layout", "bsq"},
  };
  detail::write_text(dir / (cube.name + ".json"), meta.dump(2) + "\n");

  std::vector<char> bytes;
  detail::append_le(bytes, std::span<const float>(cube.values));
  detail::write_file(dir / (cube.name + ".cube"), bytes);
  bytes.clear();
  detail::append_le(bytes, std::span<const std::int32_t>(cube.labels));
  detail::write_file(dir / (cube.name + ".labels"), bytes);
}

HsiCube load_cube(const fs::path& dir, std::optional<std::string> name) {
  if (!fs::is_directory(dir)) {
    throw IoError("cube directory " + dir.string() + " does not exist");
  }
  if (!name) {
    std::vector<std::string> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".json") {
        found.push_back(entry.path().stem().string());
      }
    }
    if (found.size() != 1) {
      throw FormatError(dir.string() + ": expected exactly one <name>.json, found " +
                        std::to_string(found.size()));
    }
    name = found.front();
  }

  const fs::path json_path = dir / (*name + ".json");
  const auto text = detail::read_file(json_path);
  nlohmann::json meta;
  HsiCube cube;
  try {
    meta = nlohmann::json::parse(text.begin(), text.end());
    cube.name = meta.at("name").get<std::string>();
    cube.height = meta.at("height").get<std::size_t>();
    cube.width = meta.at("width").get<std::size_t>();
    cube.bands = meta.at("bands").get<std::size_t>();
    cube.class_names = meta.at("classes").get<std::vector<std::string>>();
    if (meta.at("dtype").get<std::string>() != "f32le") {
      throw FormatError(json_path.string() + ": dtype must be f32le");
    }
    if (meta.at("layout").get<std::string>() != "bsq") {
      throw FormatError(json_path.string() + ": layout must be bsq");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(json_path.string() + ": " + e.what());
  }

  const std::size_t pixels = cube.height * cube.width;
  const fs::path cube_path = dir / (*name + ".cube");
  const auto raw = detail::read_file(cube_path);
  const std::size_t want = pixels * cube.bands * sizeof(float);
  if (raw.size() != want) {
    throw FormatError(cube_path.string() + ": expected " + std::to_string(want) +
                      " bytes, found " + std::to_string(raw.size()));
  }
  cube.values = detail::decode_le<float>(raw);

  const fs::path label_path = dir / (*name + ".labels");
  const auto raw_labels = detail::read_file(label_path);
  const std::size_t want_labels = pixels * sizeof(std::int32_t);
  if (raw_labels.size() != want_labels) {
    throw FormatError(label_path.string() + ": expected " +
                      std::to_string(want_labels) + " bytes, found " +
                      std::to_string(raw_labels.size()));
  }
  cube.labels = detail::decode_le<std::int32_t>(raw_labels);
  validate_cube(cube);
  return cube;
}

HsiCube synth_cube(std::size_t n_classes, std::size_t size, std::size_t bands,
                   std::uint64_t seed, double noise_sigma) {
  if (n_classes < 2) throw ValidationError("synth_cube: need at least 2 classes");
  if (size < 16) throw ValidationError("synth_cube: size must be >= 16");
  if (bands < 8) throw ValidationError("synth_cube: bands must be >= 8");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("synth_cube: noise_sigma must be finite and >= 0");
  }

  Rng rng(seed);
  auto draw_spectrum = [&] {
    std::vector<double> s(bands);
    double acc = 0.0;
    for (double& v : s) {
      acc += rng.normal();
      v = acc;
    }
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    const double min = *lo, range = *hi - *lo;
    for (double& v : s) v = range > 0.0 ? (v - min) / range : 0.0;
    return s;
  };
  auto distance = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(d);
  };

  const double min_sep = 4.0 * noise_sigma * std::sqrt(static_cast<double>(bands));
  std::vector<std::vector<double>> means;
  int redraws = 0;
  while (means.size() < n_classes) {
    auto candidate = draw_spectrum();
    const bool ok = std::all_of(means.begin(), means.end(), [&](const auto& m) {
      return distance(m, candidate) >= min_sep;
    });
    if (ok) {
      means.push_back(std::move(candidate));
    } else if (++redraws > 1000) {
      throw GenerationError("synth_cube: could not separate class spectra by " +
                            std::to_string(min_sep) + " after 1000 redraws");
    }
  }

  // Voronoi sites kept apart so every region is a usable size.
  const double extent = static_cast<double>(size);
  const double min_site_gap = extent / (2.0 * std::sqrt(static_cast<double>(n_classes)));
  std::vector<std::pair<double, double>> sites;
  int tries = 0;
  while (sites.size() < n_classes) {
    if (++tries > 100000) {
      throw GenerationError("synth_cube: cannot place " +
                            std::to_string(n_classes) + " Voronoi sites");
    }
    const double r = rng.uniform(0.0, extent), c = rng.uniform(0.0, extent);
    const bool ok = std::all_of(sites.begin(), sites.end(), [&](const auto& s) {
      return std::hypot(s.first - r, s.second - c) >= min_site_gap;
    });
    if (ok) sites.emplace_back(r, c);
  }

  HsiCube cube;
  cube.name = "synth";
  cube.height = size;
  cube.width = size;
  cube.bands = bands;
  for (std::size_t c = 0; c < n_classes; ++c)
    cube.class_names.push_back("class_" + std::to_string(c + 1));
  cube.labels.resize(size * size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double pr = static_cast<double>(r) + 0.5, pc = static_cast<double>(c) + 0.5;
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t k = 0; k < n_classes; ++k) {
        const double d = std::hypot(sites[k].first - pr, sites[k].second - pc);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      cube.labels[r * size + c] = static_cast<std::int32_t>(best + 1);
    }
  }

  cube.values.resize(size * size * bands);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const auto& mean = means[static_cast<std::size_t>(cube.labels[r * size + c] - 1)];
      for (std::size_t b = 0; b < bands; ++b) {
        const double noise = noise_sigma > 0.0 ? noise_sigma * rng.normal() : 0.0;
        cube.values[(b * size + r) * size + c] = static_cast<float>(mean[b] + noise);
      }
    }
  }
  validate_cube(cube);
  return cube;
}

Matrix cube_spectra(const HsiCube& cube) {
  const std::size_t pixels = cube.pixel_count();
  Matrix out(pixels, cube.bands);
  for (std::size_t b = 0; b < cube.bands; ++b) {
    const float* plane = cube.values.data() + b * pixels;
    for (std::size_t p = 0; p < pixels; ++p) out(p, b) = plane[p];
  }
  return out;
}

PcaModel fit_cube_pca(const HsiCube& cube, std::size_t k) {
  return pca_fit(cube_spectra(cube), k);
}

namespace {

// Reflect-101: -1 -> 1, n -> n-2.
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  if (i < 0) i = -i;
  if (i > last) i = 2 * last - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

PatchSet slice_patches(const HsiCube& cube, const PcaModel& pca,
                       std::size_t patch_size) {
  if (patch_size % 2 == 0) {
    throw ValidationError("slice_patches: patch size " +
                          std::to_string(patch_size) + " must be odd");
  }
  if (patch_size < 3 || patch_size > std::min(cube.height, cube.width)) {
    throw ValidationError("slice_patches: patch size " +
                          std::to_string(patch_size) + " outside 3..min(H, W)");
  }
  const Matrix projected = pca_project(pca, cube_spectra(cube));
  const std::size_t k = pca.k();
  const auto half = static_cast<std::ptrdiff_t>(patch_size / 2);

  PatchSet ps;
  ps.patch_size = patch_size;
  ps.pca_components = k;
  std::size_t labeled = 0;
  for (auto l : cube.labels) labeled += l != 0;
  ps.patches = Matrix(labeled, patch_size * patch_size * k);
  ps.labels.reserve(labeled);
  ps.pixel_index.reserve(labeled);

  std::size_t row_out = 0;
  for (std::size_t r = 0; r < cube.height; ++r) {
    for (std::size_t c = 0; c < cube.width; ++c) {
      const std::int32_t label = cube.label(r, c);
      if (label == 0) continue;
      auto dst = ps.patches.row(row_out++);
      std::size_t o = 0;
      for (std::ptrdiff_t dr = -half; dr <= half; ++dr) {
        const std::size_t rr = reflect(static_cast<std::ptrdiff_t>(r) + dr, cube.height);
        for (std::ptrdiff_t dc = -half; dc <= half; ++dc) {
          const std::size_t cc = reflect(static_cast<std::ptrdiff_t>(c) + dc, cube.width);
          auto src = projected.row(rr * cube.width + cc);
          std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(o));
          o += k;
        }
      }
      ps.labels.push_back(static_cast<std::size_t>(label));
      ps.pixel_index.push_back(r * cube.width + c);
    }
  }
  return ps;
}

PatchSet subset(const PatchSet& ps, std::span<const std::size_t> rows,
                SplitTag tag) {
  PatchSet out;
  out.patches = gather_rows(ps.patches, rows);
  out.patch_size = ps.patch_size;
  out.pca_components = ps.pca_components;
  out.split_tag = tag;
  out.labels.reserve(rows.size());
  out.pixel_index.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels.push_back(ps.labels[r]);
    out.pixel_index.push_back(ps.pixel_index[r]);
  }
  return out;
}

PhaseSplit split(const PatchSet& ps, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ValidationError("split: train_fraction must be in (0, 1)");
  }
  const std::size_t n_classes = spec.partition.class_count();
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::size_t label = ps.labels[i];
    if (label < 1 || label > n_classes) {
      throw ValidationError("split: sample label " + std::to_string(label) +
                            " outside the partition's 1.." +
                            std::to_string(n_classes));
    }
    by_class[label - 1].push_back(i);
  }

  Rng rng(spec.seed);
  std::vector<std::size_t> base_train, base_test, incr_train, incr_test;
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& members = by_class[c];
    if (members.empty()) {
      throw ValidationError("split: class " + std::to_string(c + 1) +
                            " has no samples");
    }
    if (members.size() < 2) {
      throw SplitError("split: class " + std::to_string(c + 1) +
                       " has fewer than 2 samples");
    }
    rng.shuffle(std::span<std::size_t>(members));
    // At least one sample on each side of the split.
    const auto n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(members.size()))),
        1, members.size() - 1);
    const bool base = spec.partition.is_base(c);
    auto& train = base ? base_train : incr_train;
    auto& test = base ? base_test : incr_test;
    train.insert(train.end(), members.begin(),
                 members.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                members.end());
  }
  for (auto* v : {&base_train, &base_test, &incr_train, &incr_test})
    std::sort(v->begin(), v->end());

  return {subset(ps, base_train, SplitTag::train),
          subset(ps, base_test, SplitTag::test),
          subset(ps, incr_train, SplitTag::train),
          subset(ps, incr_test, SplitTag::test)};
}

}  // namespace hsikd
