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

#include "genmos/corpus.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "genmos/aggregate.hpp"
#include "genmos/stats.hpp"

namespace genmos {
namespace {

std::string with_header(const std::string& body) {
  return std::string(kRatingsHeader) + "\n" + body;
}

RatingTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ratings(in);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(ParseRatings, SingleRow) {
  const auto t = parse(with_header("u1,s1,l1,M,F,4,train\n"));
  ASSERT_EQ(t.size(), 1u);
  const auto& r = t.records()[0];
  EXPECT_EQ(r.score, 4);
  EXPECT_EQ(r.listener_gender, ListenerGender::kMale);
  EXPECT_EQ(r.speaker_gender, SpeakerGender::kFemale);
  EXPECT_EQ(r.split, Split::kTrain);
}

TEST(ParseRatings, ScoreOutOfRangeNamesLine) {
  EXPECT_EQ(parse_error(with_header("u1,s1,l1,M,F,6,train\n")), "score out of range, line 2");
  EXPECT_EQ(parse_error(with_header("u1,s1,l1,M,F,4,train\nu2,s1,l1,M,F,0,train\n")),
            "score out of range, line 3");
}

TEST(ParseRatings, MalformedRowsNameLine) {
  EXPECT_NE(parse_error(with_header("u1,s1,l1,M,F,4\n")).find("line 2"), std::string::npos);
  EXPECT_NE(parse_error(with_header("u1,s1,l1,X,F,4,train\n")).find("unknown listener gender"),
            std::string::npos);
  EXPECT_NE(parse_error(with_header("u1,s1,l1,M,O,4,train\n")).find("unknown speaker gender"),
            std::string::npos);
  EXPECT_NE(parse_error(with_header("u1,s1,l1,M,F,4,holdout\n")).find("unknown split"),
            std::string::npos);
  EXPECT_NE(parse_error("utt,sys\nu1,s1\n").find("header, line 1"), std::string::npos);
}

TEST(ParseRatings, DuplicateAndSystemConflicts) {
  const std::string dup =
      parse_error(with_header("u1,s1,l1,M,F,4,train\nu1,s1,l1,M,F,3,train\n"));
  EXPECT_NE(dup.find("duplicate"), std::string::npos);
  EXPECT_NE(dup.find("line 3"), std::string::npos);
  // The same listener may rate the same utterance in another split.
  EXPECT_EQ(parse(with_header("u1,s1,l1,M,F,4,train\nu1,s1,l1,M,F,3,dev\n")).size(), 2u);
  const std::string sys =
      parse_error(with_header("u1,s1,l1,M,F,4,train\nu1,s2,l2,M,F,3,train\n"));
  EXPECT_NE(sys.find("two systems"), std::string::npos);
  EXPECT_NE(sys.find("line 3"), std::string::npos);
}

TEST(ParseRatings, CaseInsensitiveCodesAndCrlf) {
  const auto t = parse(with_header("u1,s1,l1,f,m,2,TEST\r\nu1,s1,l2,o,M,3,test\r\n"));
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.records()[0].listener_gender, ListenerGender::kFemale);
  EXPECT_EQ(t.records()[1].listener_gender, ListenerGender::kOther);
  EXPECT_EQ(t.records()[0].split, Split::kTest);
}

TEST(ParseRatings, PreservesOrderAndIndexes) {
  const auto t = parse(with_header(
      "u2,s1,l1,M,F,4,train\nu1,s1,l1,M,F,3,dev\nu2,s1,l2,F,F,5,train\n"));
  EXPECT_EQ(t.records()[0].utterance_id, "u2");
  EXPECT_EQ(t.records()[1].utterance_id, "u1");
  EXPECT_EQ(t.indices_for_utterance("u2"), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(t.indices_for_split(Split::kDev), (std::vector<std::size_t>{1}));
  EXPECT_EQ(t.utterance_count(), 2u);
}

TEST(ParseRatings, RoundTripIsStable) {
  SynthConfig c;
  c.n_systems = 20;
  c.utterances_per_system = 3;
  const auto corpus = generate_synthetic(c, 99);
  std::ostringstream first;
  write_ratings(first, corpus.ratings);
  const auto reparsed = parse(first.str());
  EXPECT_EQ(reparsed, corpus.ratings);
  std::ostringstream second;
  write_ratings(second, reparsed);
  EXPECT_EQ(first.str(), second.str());
}

TEST(Validate, EmptyTable) {
  const auto rep = validate(RatingTable{});
  EXPECT_EQ(rep.n_records, 0u);
  EXPECT_EQ(rep.n_utterances, 0u);
  EXPECT_EQ(rep.n_systems, 0u);
  EXPECT_EQ(rep.mean_male_raters_per_utt, 0.0);
  EXPECT_TRUE(rep.issues.empty());
}

TEST(Validate, CountsPerGender) {
  const auto t = parse(with_header(
      "u1,s1,a,M,F,4,train\nu1,s1,b,M,F,3,train\n"
      "u1,s1,c,F,F,4,train\nu1,s1,d,F,F,2,train\nu1,s1,e,F,F,5,train\n"));
  const auto rep = validate(t);
  EXPECT_EQ(rep.n_records, 5u);
  EXPECT_EQ(rep.n_utterances, 1u);
  EXPECT_EQ(rep.n_systems, 1u);
  EXPECT_DOUBLE_EQ(rep.mean_male_raters_per_utt, 2.0);
  EXPECT_DOUBLE_EQ(rep.mean_female_raters_per_utt, 3.0);
  EXPECT_TRUE(rep.issues.empty());
}

TEST(Validate, OtherListenersExcludedAndWarnings) {
  const auto t = parse(with_header(
      "u1,s1,a,M,F,4,train\nu1,s1,b,O,F,3,train\nu2,s1,c,F,M,2,dev\n"));
  const auto rep = validate(t);
  EXPECT_EQ(rep.n_records, 3u);
  EXPECT_DOUBLE_EQ(rep.mean_male_raters_per_utt, 0.5);
  EXPECT_DOUBLE_EQ(rep.mean_female_raters_per_utt, 0.5);
  ASSERT_EQ(rep.issues.size(), 2u);
  for (const auto& i : rep.issues) EXPECT_EQ(i.severity, "warn");
  const auto dev = validate(t, Split::kDev);
  EXPECT_EQ(dev.n_records, 1u);
  EXPECT_EQ(dev.issues.size(), 1u);
}

TEST(Validate, SyntheticReportsConfiguredRaterCounts) {
  for (auto [m, f] : {std::pair{4u, 4u}, std::pair{3u, 5u}, std::pair{6u, 2u}}) {
    SynthConfig c;
    c.n_systems = 15;
    c.utterances_per_system = 4;
    c.raters_male_per_utt = m;
    c.raters_female_per_utt = f;
    const auto rep = validate(generate_synthetic(c, 5).ratings);
    EXPECT_DOUBLE_EQ(rep.mean_male_raters_per_utt, m);
    EXPECT_DOUBLE_EQ(rep.mean_female_raters_per_utt, f);
    EXPECT_EQ(rep.n_utterances, 60u);
    EXPECT_EQ(rep.n_systems, 15u);
    EXPECT_EQ(rep.n_records, 60u * (m + f));
  }
}

TEST(ParseFeatures, SingleRow) {
  std::istringstream in("u1,0.5,-1.0\n");
  const auto t = parse_features(in);
  EXPECT_EQ(t.dim(), 2u);
  EXPECT_EQ(t.at("u1"), (std::vector<double>{0.5, -1.0}));
}

TEST(ParseFeatures, ArityErrorOnSecondRow) {
  std::istringstream in("u1,1,2,3\nu2,1,2,3,4\n");
  try {
    parse_features(in);
    FAIL() << "expected an arity error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("arity"), std::string::npos);
  }
}

TEST(ParseFeatures, NonFiniteRejected) {
  for (const char* bad : {"u1,1,nan\n", "u1,inf,2\n", "u1,1,abc\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(parse_features(in), Error) << bad;
  }
  std::istringstream dup("u1,1\nu1,2\n");
  EXPECT_THROW(parse_features(dup), Error);
}

TEST(ParseFeatures, SyntheticRoundTrip) {
  SynthConfig c;
  c.n_systems = 20;
  c.utterances_per_system = 5;
  c.feature_dim = 8;
  const auto corpus = generate_synthetic(c, 17);
  ASSERT_EQ(corpus.features.size(), 100u);
  std::ostringstream out;
  write_features(out, corpus.features);
  std::istringstream in(out.str());
  const auto back = parse_features(in);
  EXPECT_EQ(back, corpus.features);
  EXPECT_EQ(back.dim(), 8u);
}

TEST(Synthetic, ZeroGapZeroNoiseIsSymmetric) {
  SynthConfig c;
  c.n_systems = 30;
  c.gap_low_quality = 0.0;
  c.gap_high_quality = 0.0;
  c.rater_noise_std = 0.0;
  const auto corpus = generate_synthetic(c, 3);
  for (Split s : kAllSplits) {
    for (const auto& u : aggregate_table(corpus.ratings, s)) {
      ASSERT_TRUE(u.mos_male && u.mos_female);
      EXPECT_EQ(*u.mos_male, *u.mos_female) << u.utterance_id;
    }
  }
}

TEST(Synthetic, DeterministicSerialization) {
  SynthConfig c;
  c.n_systems = 25;
  auto dump = [&](std::uint64_t seed) {
    const auto corpus = generate_synthetic(c, seed);
    std::ostringstream out;
    write_ratings(out, corpus.ratings);
    write_features(out, corpus.features);
    write_truth(out, corpus.truth);
    return out.str();
  };
  EXPECT_EQ(dump(7), dump(7));
  EXPECT_NE(dump(7), dump(8));
}

TEST(Synthetic, ScoresAndFeaturesValid) {
  SynthConfig c;
  c.n_systems = 40;
  c.rater_noise_std = 2.0;
  const auto corpus = generate_synthetic(c, 12);
  for (const auto& r : corpus.ratings.records()) {
    ASSERT_GE(r.score, 1);
    ASSERT_LE(r.score, 5);
  }
  for (const auto& id : corpus.features.ids()) {
    for (double x : corpus.features.at(id)) ASSERT_TRUE(std::isfinite(x));
  }
  ASSERT_EQ(corpus.truth.size(), 240u);
  for (const auto& t : corpus.truth) {
    EXPECT_GE(t.true_quality, 1.0);
    EXPECT_LE(t.true_quality, 5.0);
    EXPECT_NEAR(t.male_offset, synthetic_offset(c, t.true_quality), 0.0);
  }
}

TEST(Synthetic, OffsetInterpolatesAnchors) {
  SynthConfig c;
  c.gap_low_quality = 0.3;
  c.gap_high_quality = 0.1;
  EXPECT_DOUBLE_EQ(synthetic_offset(c, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(synthetic_offset(c, 5.0), 0.1);
  EXPECT_DOUBLE_EQ(synthetic_offset(c, 3.0), 0.2);
}

TEST(Synthetic, RoundsBeforeClamping) {
  EXPECT_EQ(synthetic_score(0.4), 1);
  EXPECT_EQ(synthetic_score(2.5), 3);
  EXPECT_EQ(synthetic_score(2.49), 2);
  EXPECT_EQ(synthetic_score(7.2), 5);
}

TEST(Synthetic, ConfigErrors) {
  SynthConfig c;
  c.raters_male_per_utt = 0;
  c.raters_female_per_utt = 0;
  EXPECT_THROW(generate_synthetic(c, 1), Error);
  SynthConfig z;
  z.utterances_per_system = 0;
  EXPECT_THROW(generate_synthetic(z, 1), Error);
  SynthConfig n;
  n.rater_noise_std = -1.0;
  EXPECT_THROW(generate_synthetic(n, 1), Error);
}

TEST(Synthetic, SplitsFollowFractions) {
  SynthConfig c;
  c.n_systems = 200;
  c.utterances_per_system = 10;
  const auto corpus = generate_synthetic(c, 21);
  const double n = 2000.0;
  EXPECT_NEAR(aggregate_table(corpus.ratings, Split::kDev).size() / n, 0.15, 0.03);
  EXPECT_NEAR(aggregate_table(corpus.ratings, Split::kTest).size() / n, 0.15, 0.03);
}

// Expected Poor-tier gap under the generative model, estimated by direct
// simulation of one million utterances.
double monte_carlo_poor_gap(const SynthConfig& c, std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> quality(1.2, 4.8);
  std::normal_distribution<double> jitter(0.0, 0.15);
  std::normal_distribution<double> noise(0.0, c.rater_noise_std);
  auto score = [](double v) { return std::clamp(std::round(v), 1.0, 5.0); };
  double sum = 0.0;
  long count = 0;
  for (int i = 0; i < draws; ++i) {
    const double q = std::clamp(quality(rng) + jitter(rng), 1.0, 5.0);
    const double delta = c.gap_high_quality +
                         (c.gap_low_quality - c.gap_high_quality) * (5.0 - q) / 4.0;
    double sm = 0, sf = 0;
    for (std::size_t k = 0; k < c.raters_male_per_utt; ++k) sm += score(q + delta / 2 + noise(rng));
    for (std::size_t k = 0; k < c.raters_female_per_utt; ++k) sf += score(q - delta / 2 + noise(rng));
    const double n_m = static_cast<double>(c.raters_male_per_utt);
    const double n_f = static_cast<double>(c.raters_female_per_utt);
    const double all = (sm + sf) / (n_m + n_f);
    if (all < 2.0) {
      sum += sm / n_m - sf / n_f;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

TEST(Synthetic, PoorTierGapMatchesMonteCarlo) {
  SynthConfig c;
  c.n_systems = 200;
  c.utterances_per_system = 5;
  c.raters_male_per_utt = 4;
  c.raters_female_per_utt = 4;
  c.gap_low_quality = 0.3;
  c.gap_high_quality = 0.0;
  c.rater_noise_std = 0.6;
  const auto corpus = generate_synthetic(c, 7);
  std::vector<UtteranceScores> all;
  for (Split s : kAllSplits) {
    const auto part = aggregate_table(corpus.ratings, s);
    all.insert(all.end(), part.begin(), part.end());
  }
  const auto m = tier_gap_matrix(all);
  const auto& poor = m.column(QualityTier::kPoor);
  ASSERT_TRUE(poor.gap);
  const double expected = monte_carlo_poor_gap(c, 2024, 1000000);
  EXPECT_NEAR(*poor.gap, expected, 0.05) << "cell count " << poor.count;
}

TEST(SheetAdapter, HeadedLayout) {
  std::istringstream in(
      "wav_name,system_id,score,listener_name,gender,speaker_gender\n"
      "wav/sysA-001.wav,sysA,4,alice,female,M\n"
      "wav/sysA-001.wav,sysA,3,bob,Male,M\n"
      "sysB-002.wav,sysB,2,carol,unknown,F\n");
  const auto t = adapt_sheet(in, {});
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.records()[0].utterance_id, "sysA-001");
  EXPECT_EQ(t.records()[0].listener_gender, ListenerGender::kFemale);
  EXPECT_EQ(t.records()[1].listener_gender, ListenerGender::kMale);
  EXPECT_EQ(t.records()[2].listener_gender, ListenerGender::kOther);
  EXPECT_EQ(t.records()[2].speaker_gender, SpeakerGender::kFemale);
  EXPECT_EQ(t.records()[2].split, Split::kTrain);
}

TEST(SheetAdapter, BvccSetsLayout) {
  std::istringstream spk("utterance_id,speaker_gender\nsys1-utt1,female\n");
  SheetAdapterOptions opt;
  opt.split = Split::kDev;
  opt.speaker_genders = parse_speaker_genders(spk);
  std::istringstream in(
      "sys1,sys1-utt1.wav,4,XXX,30-39_Male_yes_no_LST01\n"
      "sys1,sys1-utt1.wav,2,XXX,20-29_female_no_no_LST02\n");
  const auto t = adapt_sheet(in, opt);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.records()[0].listener_gender, ListenerGender::kMale);
  EXPECT_EQ(t.records()[1].listener_gender, ListenerGender::kFemale);
  EXPECT_EQ(t.records()[0].speaker_gender, SpeakerGender::kFemale);
  EXPECT_EQ(t.records()[0].split, Split::kDev);
  EXPECT_EQ(t.records()[1].listener_id, "20-29_female_no_no_LST02");
}

TEST(SheetAdapter, MissingSpeakerGenderNamesLine) {
  std::istringstream in("sys1,sys1-utt9.wav,4,XXX,30-39_Male_yes_no_LST01\n");
  try {
    adapt_sheet(in, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("sys1-utt9"), std::string::npos);
  }
}

}  // namespace
}  // namespace genmos
