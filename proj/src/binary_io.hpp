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

// Little-endian scalar I/O shared by the cube and checkpoint formats.

#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "hsikd/error.hpp"

namespace hsikd::detail {

template <typename T>
void append_le(std::vector<char>& out, std::span<const T> values) {
  const std::size_t offset = out.size();
  out.resize(offset + values.size() * sizeof(T));
  char* dst = out.data() + offset;
  for (const T& v : values) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(bytes, bytes + sizeof(T));
    }
    std::memcpy(dst, bytes, sizeof(T));
    dst += sizeof(T);
  }
}

template <typename T>
std::vector<T> decode_le(std::span<const char> bytes) {
  std::vector<T> out(bytes.size() / sizeof(T));
  const char* src = bytes.data();
  for (T& v : out) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, src, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(tmp, tmp + sizeof(T));
    }
    std::memcpy(&v, tmp, sizeof(T));
    src += sizeof(T);
  }
  return out;
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path,
                       std::span<const char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  write_file(path, std::span<const char>(text.data(), text.size()));
}

}  // namespace hsikd::detail
