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
#include <cmath>
#include <limits>

#include <doctest.h>

#include "hsikd/error.hpp"
#include "hsikd/retention.hpp"
#include "hsikd/trainer.hpp"
#include "oracles.hpp"

using namespace hsikd;

namespace {

PatchSet tagged(const Matrix& x, std::vector<std::size_t> labels) {
  PatchSet ps;
  ps.patches = x;
  ps.labels = std::move(labels);
  for (std::size_t i = 0; i < ps.labels.size(); ++i) ps.pixel_index.push_back(i);
  return ps;
}

}  // namespace

TEST_CASE("score_base_logits: uniform, saturated and oracle") {
  const ClassPartition part(6, std::vector<std::size_t>{1, 3, 4});
  std::vector<double> z(6, 0.0);
  BaseScore s = score_base_logits(z, part);
  CHECK(s.best_base_label == 2);  // lowest base index, 1-based
  CHECK(s.score == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  z[3] = 50.0;
  s = score_base_logits(z, part);
  CHECK(s.best_base_label == 4);
  CHECK(s.score == doctest::Approx(1.0).epsilon(1e-15));

  // Incremental logits never matter.
  z[0] = 1e6;
  z[5] = -1e6;
  CHECK(score_base_logits(z, part).score == s.score);

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = oracle::random_vector(rng, 6, -5.0, 5.0);
    const auto q = oracle::softmax_ld(v, part.base(), 1.0);
    const auto it = std::max_element(q.begin(), q.end());
    const auto got = score_base_logits(v, part);
    CHECK(got.best_base_label == part.base()[std::size_t(it - q.begin())] + 1);
    CHECK(got.score == doctest::Approx(double(*it)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(score_base_logits(std::vector<double>(5), part), DimensionError);
}

TEST_CASE("score_against_base checks dimensions") {
  const std::vector<std::size_t> dims{4, 6, 3};
  const MlpModel m = init_mlp(dims, 1);
  const ClassPartition part(3, std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(score_against_base(m, std::vector<double>(5), part), DimensionError);
  const auto s = score_against_base(m, std::vector<double>{0.1, 0.2, 0.3, 0.4}, part);
  CHECK((s.score >= 0.5 && s.score <= 1.0));
}

TEST_CASE("relabel thresholds, label safety and monotonicity") {
  const ClassPartition part(6, std::vector<std::size_t>{0, 1, 2});
  Rng rng(9);
  const Matrix logits = oracle::random_matrix(rng, 300, 6, -4.0, 4.0);
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < 300; ++i) labels.push_back(4 + i % 3);
  const PatchSet ps = tagged(Matrix(300, 1), labels);

  std::vector<std::vector<bool>> sets;
  for (double alpha : {0.5, 0.7, 0.9}) {
    const auto d = relabel_from_logits(logits, ps, part, {alpha, true});
    REQUIRE(d.size() == 300);
    std::vector<bool> set;
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(d[i].sample_index == i);
      CHECK(d[i].original_label == labels[i]);
      CHECK(d[i].relabeled == (d[i].teacher_score >= alpha));
      if (d[i].relabeled) CHECK(part.is_base(d[i].effective_label - 1));
      else CHECK(d[i].effective_label == labels[i]);
      set.push_back(d[i].relabeled);
    }
    sets.push_back(set);
  }
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK((!sets[1][i] || sets[0][i]));
    CHECK((!sets[2][i] || sets[1][i]));
  }

  // Disabled: scores reported, nothing relabeled.
  for (const auto& d : relabel_from_logits(logits, ps, part, {0.5, false}))
    CHECK_FALSE(d.relabeled);
  // Near zero: every sample takes a base label.
  for (const auto& d : relabel_from_logits(logits, ps, part, {1e-12, true}))
    CHECK(d.relabeled);
  CHECK(relabel_from_logits(logits, ps, part, {0.8, true}) ==
        relabel_from_logits(logits, ps, part, {0.8, true}));

  CHECK_THROWS_AS(relabel_from_logits(logits, ps, part, {0.0, true}), ValidationError);
  CHECK_THROWS_AS(relabel_from_logits(logits, ps, part, {1.0, true}), ValidationError);
  labels[7] = 2;  // base label among incremental samples
  CHECK_THROWS_AS(relabel_from_logits(logits, tagged(Matrix(300, 1), labels), part, {0.8, true}),
                  ValidationError);
}

TEST_CASE("a random teacher relabels nothing at alpha close to one") {
  const std::vector<std::size_t> dims{50, 32, 8};
  const MlpModel teacher = init_mlp(dims, 4);
  const ClassPartition part(8, std::vector<std::size_t>{0, 1, 2, 3});
  Rng rng(5);
  std::vector<std::size_t> labels(200, 6);
  const PatchSet ps = tagged(oracle::random_matrix(rng, 200, 50), labels);
  for (const auto& d : relabel_dataset(teacher, ps, part, {0.999999, true}))
    CHECK_FALSE(d.relabeled);
}

TEST_CASE("teacher recovers the true class of disguised base samples") {
  // Incremental samples secretly drawn from base-class pixels and tagged as
  // new classes.
  const HsiCube cube = synth_cube(8, 48, 32, 21, 0.02);
  RunConfig cfg;
  cfg.patch_size = 5;
  cfg.pca_components = 10;
  cfg.hidden_dims = {64};
  cfg.lr = 1e-3;
  cfg.batch_size = 32;
  cfg.epochs = 40;
  const PreparedData data = prepare_data(cfg, cube);
  const PhaseSplit sp = split(data.patches, {0.1, 1, data.partition});
  const TrainedModel teacher = train_base(sp.base_train, cfg, data.partition, 1);

  PatchSet disguised = sp.base_test;
  const std::vector<std::size_t>& incr = data.partition.incremental();
  for (std::size_t i = 0; i < disguised.size(); ++i) disguised.labels[i] = incr[i % incr.size()] + 1;
  const auto d = relabel_dataset(teacher.model, disguised, data.partition, {0.8, true});
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    hits += d[i].relabeled && d[i].effective_label == sp.base_test.labels[i];
  CHECK(double(hits) / double(d.size()) >= 0.9);
}

TEST_CASE("relabel audit csv lists relabeled samples only") {
  std::vector<RelabelDecision> d(3);
  d[0] = {0, 5, 5, 0.25, false};
  d[1] = {1, 6, 2, 0.875, true};
  d[2] = {2, 7, 1, 0.1, true};
  CHECK(relabel_csv_header() == "run,sample_index,original_label,effective_label,score\n");
  CHECK(relabel_csv_rows(d, 3) == "3,1,6,2,0.875\n3,2,7,1,0.10000000000000001\n");
}
