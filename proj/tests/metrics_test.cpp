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

#include "genmos/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "genmos/corpus.hpp"
#include "oracles.hpp"

namespace genmos {
namespace {

using V = std::vector<double>;

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(Pearson, Examples) {
  EXPECT_DOUBLE_EQ(pearson(V{1, 2, 3}, V{1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(pearson(V{0, 1, 2}, V{0, -1, -2}), -1.0);
}

TEST(Pearson, DegenerateNamesVector) {
  EXPECT_NE(error_of([] { pearson(V{1, 1, 1}, V{1, 2, 3}); }).find("first"), std::string::npos);
  EXPECT_NE(error_of([] { pearson(V{1, 2, 3}, V{2, 2, 2}); }).find("second"), std::string::npos);
  EXPECT_THROW(pearson(V{1}, V{1}), Error);
  EXPECT_THROW(pearson(V{1, 2}, V{1, 2, 3}), Error);
}

TEST(Pearson, RandomMatchesFormula) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 250; ++i) {
    const auto x = oracle::random_vector(rng, 40, -3, 3);
    const auto y = oracle::random_vector(rng, 40, 0, 10);
    EXPECT_NEAR(pearson(x, y), oracle::pearson(x, y), 1e-12);
  }
}

TEST(Spearman, Examples) {
  EXPECT_DOUBLE_EQ(spearman(V{1, 5, 9, 10}, V{-3, 0, 2, 100}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(V{1, 2, 2, 3}, V{10, 20, 20, 40}), 1.0);
}

TEST(Spearman, AverageRanks) {
  EXPECT_EQ(average_ranks(V{10, 20, 20, 5, 20}), (V{2, 4, 4, 1, 4}));
}

TEST(Spearman, RandomWithTiesMatchesBruteForce) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 250; ++i) {
    const auto x = oracle::random_ties(rng, 30, 6);
    const auto y = oracle::random_ties(rng, 30, 4);
    EXPECT_NEAR(spearman(x, y), oracle::spearman(x, y), 1e-12);
    EXPECT_EQ(spearman(x, y), pearson(average_ranks(x), average_ranks(y)));
  }
}

TEST(KendallTauB, Examples) {
  EXPECT_DOUBLE_EQ(kendall_tau_b(V{1, 2, 3, 4}, V{1, 2, 3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau_b(V{1, 2, 3}, V{3, 2, 1}), -1.0);
  EXPECT_THROW(kendall_tau_b(V{2, 2, 2}, V{1, 2, 3}), Error);
  EXPECT_THROW(kendall_tau_b(V{1, 2, 3}, V{5, 5, 5}), Error);
}

TEST(KendallTauB, RandomWithTiesMatchesPairEnumerationExactly) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 250; ++i) {
    const auto x = oracle::random_ties(rng, 25, 5);
    const auto y = oracle::random_ties(rng, 25, 3);
    EXPECT_EQ(kendall_tau_b(x, y), oracle::kendall_tau_b(x, y));
  }
}

TEST(KendallTauB, NoTiesEqualsTauA) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto x = oracle::random_vector(rng, 20, 0, 1);
    const auto y = oracle::random_vector(rng, 20, 0, 1);
    const auto c = oracle::count_pairs(x, y);
    EXPECT_NEAR(kendall_tau_b(x, y),
                static_cast<double>(c.concordant - c.discordant) / static_cast<double>(c.n0),
                1e-15);
  }
}

TEST(Mse, Examples) {
  EXPECT_EQ(mse(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(mse(V{1, 2}, V{2, 4}), 2.5);
  EXPECT_THROW(mse(V{1}, V{1, 2}), Error);
  EXPECT_THROW(mse(V{}, V{}), Error);
}

TEST(Mse, RandomMatchesLoop) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto x = oracle::random_vector(rng, 100, 1, 5);
    const auto y = oracle::random_vector(rng, 100, 1, 5);
    EXPECT_NEAR(mse(x, y), oracle::mse(x, y), 1e-12);
  }
}

TEST(Correlations, InvarianceAndSymmetry) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto x = oracle::random_ties(rng, 30, 8);
    const auto y = oracle::random_vector(rng, 30, 1, 5);
    V affine = x, cubed = x;
    for (double& v : affine) v = 3.0 * v - 7.0;
    for (double& v : cubed) v = v * v * v + 2.0;
    EXPECT_NEAR(pearson(affine, y), pearson(x, y), 1e-12);
    EXPECT_EQ(spearman(cubed, y), spearman(x, y));
    EXPECT_EQ(kendall_tau_b(cubed, y), kendall_tau_b(x, y));
    EXPECT_NEAR(pearson(y, x), pearson(x, y), 1e-15);
    EXPECT_NEAR(spearman(y, x), spearman(x, y), 1e-15);
    EXPECT_EQ(kendall_tau_b(y, x), kendall_tau_b(x, y));
    EXPECT_EQ(mse(y, x), mse(x, y));
  }
}

UtteranceScores gt(const std::string& utt, const std::string& sys, double all,
                   std::optional<double> m, std::optional<double> f) {
  UtteranceScores s;
  s.utterance_id = utt;
  s.system_id = sys;
  s.mos_all = all;
  s.mos_male = m;
  s.mos_female = f;
  s.n_all = 2;
  return s;
}

TEST(EvaluatePredictions, IdentityIsPerfect) {
  std::vector<UtteranceScores> g = {gt("a", "s1", 2.0, 2, 2), gt("b", "s1", 3.5, 3, 4),
                                    gt("c", "s2", 4.0, 4, 4), gt("d", "s2", 1.5, 1, 2),
                                    gt("e", "s3", 3.0, 3, 3)};
  std::map<std::string, double> preds;
  for (const auto& s : g) preds[s.utterance_id] = *s.mos_all;
  const auto r = evaluate_predictions(preds, g, Channel::kAll);
  for (const MetricSet& m : {r.utterance_level, r.system_level}) {
    EXPECT_DOUBLE_EQ(m.lcc, 1.0);
    EXPECT_DOUBLE_EQ(m.srcc, 1.0);
    EXPECT_DOUBLE_EQ(m.ktau, 1.0);
    EXPECT_EQ(m.mse, 0.0);
  }
  EXPECT_EQ(r.n_utterances, 5u);
  EXPECT_EQ(r.n_systems, 3u);
}

TEST(EvaluatePredictions, ConstantShift) {
  std::vector<UtteranceScores> g = {gt("a", "s1", 2.0, 2, 2), gt("b", "s1", 3.0, 3, 3),
                                    gt("c", "s2", 4.0, 4, 4), gt("d", "s2", 4.5, 4, 5)};
  std::map<std::string, double> preds;
  for (const auto& s : g) preds[s.utterance_id] = *s.mos_all + 0.5;
  const auto r = evaluate_predictions(preds, g, Channel::kAll);
  EXPECT_NEAR(r.utterance_level.lcc, 1.0, 1e-15);
  EXPECT_NEAR(r.system_level.lcc, 1.0, 1e-15);
  EXPECT_NEAR(r.utterance_level.mse, 0.25, 1e-15);
  EXPECT_NEAR(r.system_level.mse, 0.25, 1e-15);
}

TEST(EvaluatePredictions, DropsMissingChannelAndReportsMissingPredictions) {
  std::vector<UtteranceScores> g = {gt("a", "s1", 2.0, std::nullopt, 2), gt("b", "s1", 3.0, 3, 3),
                                    gt("c", "s2", 4.0, 4, 4), gt("d", "s2", 4.5, 4, 5),
                                    gt("e", "s3", 1.0, std::nullopt, 1)};
  std::map<std::string, double> preds = {{"b", 3.1}, {"c", 3.9}, {"d", 4.4}};
  const auto r = evaluate_predictions(preds, g, Channel::kMale);
  EXPECT_EQ(r.n_utterances, 3u);
  EXPECT_EQ(r.n_systems, 2u);
  const std::string msg = error_of([&] { evaluate_predictions(preds, g, Channel::kFemale); });
  EXPECT_NE(msg.find("a"), std::string::npos);
  EXPECT_NE(msg.find("e"), std::string::npos);
  EXPECT_NE(msg.find("2 utterance"), std::string::npos);
  std::vector<UtteranceScores> one_sys = {gt("b", "s1", 3.0, 3, 3), gt("x", "s1", 2.0, 2, 2)};
  EXPECT_THROW(evaluate_predictions({{"b", 1.0}, {"x", 2.0}}, one_sys, Channel::kAll), Error);
}

TEST(EvaluatePredictions, MatchesScriptedPipeline) {
  SynthConfig c;
  c.n_systems = 10;
  c.utterances_per_system = 5;
  c.raters_male_per_utt = 1;
  c.raters_female_per_utt = 2;
  c.dev_fraction = 0.0;
  c.test_fraction = 0.0;
  const auto corpus = generate_synthetic(c, 44);
  const auto scores = aggregate_table(corpus.ratings, Split::kTrain);
  ASSERT_EQ(scores.size(), 50u);
  std::mt19937_64 rng(45);
  std::normal_distribution<double> noise(0.0, 0.4);
  std::map<std::string, double> preds;
  for (const auto& s : scores) preds[s.utterance_id] = *s.mos_all + noise(rng);

  for (Channel ch : {Channel::kAll, Channel::kMale, Channel::kFemale}) {
    const auto r = evaluate_predictions(preds, scores, ch);
    V p, g;
    std::vector<std::pair<std::string, double>> sp, sg;
    for (const auto& s : scores) {
      const double truth = ch == Channel::kAll    ? *s.mos_all
                           : ch == Channel::kMale ? *s.mos_male
                                                  : *s.mos_female;
      p.push_back(preds.at(s.utterance_id));
      g.push_back(truth);
      sp.emplace_back(s.system_id, p.back());
      sg.emplace_back(s.system_id, truth);
    }
    V sys_p, sys_g;
    for (const auto& [k, v] : oracle::group_mean(sp)) sys_p.push_back(v);
    for (const auto& [k, v] : oracle::group_mean(sg)) sys_g.push_back(v);
    EXPECT_NEAR(r.utterance_level.lcc, oracle::pearson(p, g), 1e-10);
    EXPECT_NEAR(r.utterance_level.srcc, oracle::spearman(p, g), 1e-10);
    EXPECT_NEAR(r.utterance_level.ktau, oracle::kendall_tau_b(p, g), 1e-10);
    EXPECT_NEAR(r.utterance_level.mse, oracle::mse(p, g), 1e-10);
    EXPECT_NEAR(r.system_level.lcc, oracle::pearson(sys_p, sys_g), 1e-10);
    EXPECT_NEAR(r.system_level.srcc, oracle::spearman(sys_p, sys_g), 1e-10);
    EXPECT_NEAR(r.system_level.ktau, oracle::kendall_tau_b(sys_p, sys_g), 1e-10);
    EXPECT_NEAR(r.system_level.mse, oracle::mse(sys_p, sys_g), 1e-10);
    EXPECT_EQ(r.n_systems, 10u);
  }
}

TEST(RelativeGap, PublishedExamples) {
  EXPECT_NEAR(relative_gap(0.430, 0.372), 15.6, 0.05);
  EXPECT_NEAR(relative_gap(0.194, 0.141), 37.6, 0.05);
  EXPECT_EQ(relative_gap(0.3, 0.3), 0.0);
  EXPECT_THROW(relative_gap(0.3, 0.0), Error);
}

}  // namespace
}  // namespace genmos
