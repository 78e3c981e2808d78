/*
 * Copyright 2026 The genmos Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// End-to-end tour of the library on a small synthetic corpus: listener
// statistics, the tier gap matrix, and a baseline vs gender-aware model.

#include <iostream>

#include "genmos/genmos.hpp"

int main() {
  using namespace genmos;

  SynthConfig sc;
  sc.n_systems = 60;
  const auto corpus = generate_synthetic(sc, 7);

  std::cout << condition_markdown(condition_stats(corpus.ratings, Split::kTrain)) << '\n';
  std::cout << welch_markdown(listener_gender_tests(corpus.ratings, Split::kTrain)) << '\n';
  std::cout << tiers_markdown(tier_gap_matrix(aggregate_table(corpus.ratings, Split::kTrain)))
            << '\n';

  const auto data = make_corpus(corpus.ratings, corpus.features);
  TrainConfig tc;
  tc.max_steps = 2000;
  tc.eval_every = 100;
  tc.patience = 5;
  tc.lr = 5e-3;
  tc.dims.d = corpus.features.dim();

  const std::vector<std::uint64_t> seeds{1337};
  tc.enable_gender_branch = false;
  const auto baseline = multi_seed(tc, seeds, data, "Baseline");
  tc.enable_gender_branch = true;
  const auto aware = multi_seed(tc, seeds, data, "Gender-aware");
  std::cout << bias_markdown(merge_reports(baseline, aware));
  return 0;
}
