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

// Hyperspectral cubes: on-disk format, synthetic generation, PCA-reduced
// patch extraction, and the per-class base/incremental split.
//
// Cube directory format (all little-endian):
//   <name>.json    {"name","height","width","bands","classes":[...],
//                   "dtype":"f32le","layout":"bsq"}
//   <name>.cube    H*W*B float32, band-sequential: index (b*H + r)*W + c
//   <name>.labels  H*W int32, row-major, 0 = unlabeled, 1..|classes|

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hsikd/distill.hpp"
#include "hsikd/numkit.hpp"

namespace hsikd {

struct HsiCube {
  std::string name;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::vector<float> values;          // band-sequential
  std::vector<std::int32_t> labels;   // row-major, 0 = unlabeled
  std::vector<std::string> class_names;

  float value(std::size_t band, std::size_t row, std::size_t col) const {
    return values[(band * height + row) * width + col];
  }
  std::int32_t label(std::size_t row, std::size_t col) const {
    return labels[row * width + col];
  }
  std::size_t pixel_count() const { return height * width; }
  std::size_t class_count() const { return class_names.size(); }

  bool operator==(const HsiCube&) const = default;
};

// Throws FormatError when sizes, label range, or class coverage are invalid.
void validate_cube(const HsiCube& cube);

void write_cube(const HsiCube& cube, const std::filesystem::path& dir);

// Reads the cube stored in `dir`. Without a name the directory must hold
// exactly one <name>.json.
HsiCube load_cube(const std::filesystem::path& dir,
                  std::optional<std::string> name = std::nullopt);

// Deterministic synthetic scene: one smooth mean spectrum per class,
// Voronoi label raster, i.i.d. Gaussian pixel noise.
HsiCube synth_cube(std::size_t n_classes, std::size_t size, std::size_t bands,
                   std::uint64_t seed, double noise_sigma);

// Every pixel's spectrum as one row, raster order: (H*W) x B.
Matrix cube_spectra(const HsiCube& cube);

// PCA over all pixels, labeled or not.
PcaModel fit_cube_pca(const HsiCube& cube, std::size_t k);

enum class SplitTag { all, train, test };

struct PatchSet {
  Matrix patches;                        // n x (s*s*K), (row, col, component)
  std::vector<std::size_t> labels;       // 1-based class labels
  std::vector<std::size_t> pixel_index;  // row * width + col of the center
  std::size_t patch_size = 0;
  std::size_t pca_components = 0;
  SplitTag split_tag = SplitTag::all;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return patches.cols(); }
};

// One patch per labeled pixel in raster order; mirror (reflect-101) padding
// at the borders.
PatchSet slice_patches(const HsiCube& cube, const PcaModel& pca,
                       std::size_t patch_size);

PatchSet subset(const PatchSet& ps, std::span<const std::size_t> rows,
                SplitTag tag);

struct SplitSpec {
  double train_fraction = 0.1;
  std::uint64_t seed = 0;
  ClassPartition partition;
};

struct PhaseSplit {
  PatchSet base_train;
  PatchSet base_test;
  PatchSet incr_train;
  PatchSet incr_test;
};

// Per class: seeded shuffle, then round(train_fraction * count) samples go to
// train and the rest to test. Classes are routed by spec.partition.
PhaseSplit split(const PatchSet& ps, const SplitSpec& spec);

}  // namespace hsikd
