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

#include "hsikd/report.hpp"

#include <algorithm>
#include <cstdio>

namespace hsikd {

namespace {

std::size_t display_width(const std::string& s) {
  // Count UTF-8 lead bytes only.
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const char* mark(bool on) { return on ? "✓" : ""; }

}  // namespace

Table class_table(const ExperimentResult& result) {
  Table t{{"", "Class name", "Accuracy (%)"}};
  auto block = [&](const char* title, const std::vector<std::size_t>& classes) {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      t.push_back({i == 0 ? title : "", result.class_names[classes[i]],
                   format_mean_std(result.per_class[classes[i]])});
    }
  };
  block("Base Classes", result.partition.base());
  block("Incremental Classes", result.partition.incremental());
  t.push_back({"Performance", "OA", format_mean_std(result.oa)});
  t.push_back({"", "AA", format_mean_std(result.aa)});
  t.push_back({"", "Kappa", format_mean_std(result.kappa)});
  return t;
}

Table ablation_table(const std::vector<AblationRow>& rows) {
  Table t{{"Baseline", "Review labels", "Mask labels", "OA", "AA", "Kappa"}};
  for (const auto& r : rows) {
    t.push_back({mark(true), mark(r.review), mark(r.mask), format_mean_std(r.result.oa),
                 format_mean_std(r.result.aa), format_mean_std(r.result.kappa)});
  }
  return t;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
  Table t{{"patch_size", "OA", "seconds"}};
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.2f", r.seconds);
    t.push_back({std::to_string(r.patch_size), format_mean_std(r.oa), buf});
  }
  return t;
}

std::string render_text(const Table& table) {
  std::vector<std::size_t> width;
  for (const auto& row : table) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  }
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += row[c];
      if (c + 1 < row.size()) line.append(width[c] - display_width(row[c]), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string render_csv(const Table& table) {
  std::string out;
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace hsikd
