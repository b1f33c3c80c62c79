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

#include <sstream>

#include <doctest.h>

#include "hsikd/report.hpp"

using namespace hsikd;

namespace {

// Botswana-shaped result: 5 base and 9 incremental classes.
ExperimentResult botswana_like() {
  ExperimentResult r;
  r.class_names = {"Water", "Hippo grass", "Floodplain grasses1", "Floodplain grasses2",
                   "Reeds", "Riparian", "Firescar", "Island interior", "Acacia woodlands",
                   "Acacia shrublands", "Acacia grasslands", "Short mopane", "Mixed mopane",
                   "Exposed soils"};
  r.partition = ClassPartition(14, std::vector<std::size_t>{4, 7, 8, 10, 13});
  for (std::size_t c = 0; c < 14; ++c) r.per_class.push_back({90.0 + c * 0.5, 1.25});
  r.oa = {98.47, 0.65};
  r.aa = {98.9, 0.5};
  r.kappa = {98.34, 0.70};
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("class table groups base and incremental blocks") {
  const Table t = class_table(botswana_like());
  REQUIRE(t.size() == 1 + 5 + 9 + 3);
  CHECK(t[1][0] == "Base Classes");
  CHECK(t[1][1] == "Reeds");
  for (std::size_t i = 2; i <= 5; ++i) CHECK(t[i][0].empty());
  CHECK(t[6][0] == "Incremental Classes");
  CHECK(t[6][1] == "Water");
  CHECK(t[15][0] == "Performance");
  CHECK(t[15][1] == "OA");
  CHECK(t[15][2] == "98.47±0.65");
  CHECK(t[16][1] == "AA");
  CHECK(t[17][1] == "Kappa");
  CHECK(t[17][2] == "98.34±0.70");
}

TEST_CASE("text and csv carry identical cells") {
  const Table t = class_table(botswana_like());
  const auto csv = lines(render_csv(t));
  const auto text = lines(render_text(t));
  REQUIRE(csv.size() == t.size());
  REQUIRE(text.size() == t.size());
  CHECK(csv[0] == ",Class name,Accuracy (%)");
  CHECK(csv[1] == "Base Classes,Reeds,92.00±1.25");
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(text[i].find(t[i][2]) != std::string::npos);
  // Value column starts at the same code-point offset on every row.
  auto value_col = [](const std::string& line, const std::string& cell) {
    std::size_t cps = 0;
    const std::size_t at = line.find(cell);
    for (std::size_t i = 0; i < at; ++i) cps += (static_cast<unsigned char>(line[i]) & 0xC0) != 0x80;
    return cps;
  };
  const std::size_t col = value_col(text[1], t[1][2]);
  for (std::size_t i = 2; i < t.size(); ++i) CHECK(value_col(text[i], t[i][2]) == col);
}

TEST_CASE("ablation table shape") {
  std::vector<AblationRow> rows;
  for (int i = 0; i < 4; ++i) {
    AblationRow r;
    r.review = i == 1 || i == 3;
    r.mask = i >= 2;
    r.result.oa = {59.71, 4.28};
    r.result.aa = {55.23, 4.56};
    r.result.kappa = {54.83, 5.31};
    rows.push_back(r);
  }
  const auto csv = lines(render_csv(ablation_table(rows)));
  REQUIRE(csv.size() == 5);
  CHECK(csv[0] == "Baseline,Review labels,Mask labels,OA,AA,Kappa");
  CHECK(csv[1] == "✓,,,59.71±4.28,55.23±4.56,54.83±5.31");
  CHECK(csv[4].rfind("✓,✓,✓,", 0) == 0);
}

TEST_CASE("sweep table and csv quoting") {
  SweepRow row;
  row.patch_size = 9;
  row.oa = {97.5, 0.25};
  row.seconds = 1.5;
  const std::vector<SweepRow> rows{row};
  CHECK(render_csv(sweep_table(rows)) == "patch_size,OA,seconds\n9,97.50±0.25,1.50\n");
  const Table t{{"a,b", "say \"hi\""}};
  CHECK(render_csv(t) == "\"a,b\",\"say \"\"hi\"\"\"\n");
}
