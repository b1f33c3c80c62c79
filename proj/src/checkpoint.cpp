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

#include <algorithm>
#include <json.hpp>

#include "binary_io.hpp"
#include "hsikd/error.hpp"
#include "hsikd/net.hpp"

namespace hsikd {

namespace {
constexpr const char* kFormatTag = "hsikd-mlp";
constexpr int kFormatVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model,
                     std::span<const std::string> class_names) {
  nlohmann::json header = {
      {"format", kFormatTag},
      {"version", kFormatVersion},
      {"layer_dims", model.layer_dims},
      {"activation", "relu"},
      {"output_activation", "identity"},
      {"seed", model.seed},
      {"class_names", std::vector<std::string>(class_names.begin(),
                                               class_names.end())},
      {"dtype", "f64le"},
  };
  const std::string text = header.dump() + "\n";
  std::vector<char> bytes(text.begin(), text.end());
  for (auto block : parameter_blocks(model)) detail::append_le(bytes, block);
  detail::write_file(path, bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::vector<char> bytes = detail::read_file(path);
  const auto newline = std::find(bytes.begin(), bytes.end(), '\n');
  if (newline == bytes.end()) {
    throw FormatError(path.string() + ": missing checkpoint header line");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin(), newline);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint header: " + e.what());
  }
  if (header.value("format", "") != kFormatTag ||
      header.value("version", 0) != kFormatVersion) {
    throw FormatError(path.string() + ": not an hsikd-mlp v1 checkpoint");
  }
  if (header.value("activation", "") != "relu") {
    throw FormatError(path.string() + ": unsupported activation");
  }

  Checkpoint ck;
  try {
    ck.model.layer_dims = header.at("layer_dims").get<std::vector<std::size_t>>();
    ck.model.seed = header.at("seed").get<std::uint64_t>();
    ck.class_names = header.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint header: " + e.what());
  }
  const auto& dims = ck.model.layer_dims;
  if (dims.size() < 2 || std::find(dims.begin(), dims.end(), 0u) != dims.end()) {
    throw FormatError(path.string() + ": invalid layer_dims");
  }
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    ck.model.weights.emplace_back(dims[l + 1], dims[l]);
    ck.model.biases.emplace_back(dims[l + 1], 0.0);
  }

  const std::size_t expected = ck.model.parameter_count() * sizeof(double);
  const auto payload_begin =
      static_cast<std::size_t>(std::distance(bytes.begin(), newline)) + 1;
  const std::size_t actual = bytes.size() - payload_begin;
  if (actual != expected) {
    throw FormatError(path.string() + ": expected " + std::to_string(expected) +
                      " parameter bytes, found " + std::to_string(actual));
  }
  std::span<const char> payload(bytes.data() + payload_begin, actual);
  for (auto block : parameter_blocks(ck.model)) {
    const std::size_t n = block.size() * sizeof(double);
    auto values = detail::decode_le<double>(payload.first(n));
    std::copy(values.begin(), values.end(), block.begin());
    payload = payload.subspan(n);
  }
  for (auto block : parameter_blocks(std::as_const(ck.model))) {
    if (!all_finite(block)) {
      throw FormatError(path.string() + ": non-finite parameter");
    }
  }
  return ck;
}

}  // namespace hsikd
