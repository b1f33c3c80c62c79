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

// Result tables, each as aligned text and as CSV with identical cells.
//
// Per-class table:
//   Base Classes         <name>  98.47±0.65
//                        ...
//   Incremental Classes  <name>  ...
//   Performance          OA      ...
//                        AA      ...
//                        Kappa   ...

#pragma once

#include <string>
#include <vector>

#include "hsikd/trainer.hpp"

namespace hsikd {

// Rows of cells; the first row is the header.
using Table = std::vector<std::vector<std::string>>;

Table class_table(const ExperimentResult& result);
Table ablation_table(const std::vector<AblationRow>& rows);
Table sweep_table(const std::vector<SweepRow>& rows);

// Columns padded to the widest cell (width counted in code points).
std::string render_text(const Table& table);
std::string render_csv(const Table& table);

}  // namespace hsikd
