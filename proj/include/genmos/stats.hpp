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

// Descriptive statistics, Welch's unequal-variance t-test with Student-t
// tail probabilities, per-condition rating statistics, and the quality-tier
// gender gap matrix.

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "genmos/aggregate.hpp"
#include "genmos/common.hpp"
#include "genmos/corpus.hpp"

namespace genmos {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample standard deviation (n - 1 divisor); std is 0 for n = 1.
inline MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error("mean_std of an empty sample");
  const double mean = compensated_mean(values);
  if (values.size() == 1) return {mean, 0.0};
  CompensatedSum ss;
  for (double v : values) ss.add((v - mean) * (v - mean));
  return {mean, std::sqrt(ss.value() / static_cast<double>(values.size() - 1))};
}

namespace detail {

// Stirling series remainder: lgamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2].
// Accurate to below 1e-17 for z >= 10.
inline double stirling_remainder(double z) {
  const double r = 1.0 / z;
  const double r2 = r * r;
  return r * (1.0 / 12.0 +
              r2 * (-1.0 / 360.0 +
                    r2 * (1.0 / 1260.0 +
                          r2 * (-1.0 / 1680.0 +
                                r2 * (1.0 / 1188.0 +
                                      r2 * (-691.0 / 360360.0 +
                                            r2 * (1.0 / 156.0 + r2 * (-3617.0 / 122400.0))))))));
}

// ln B(a, b). Large arguments go through Stirling differences so that the
// O(a ln a) terms cancel analytically instead of in floating point.
inline double log_beta(double a, double b) {
  const double big = std::max(a, b);
  const double small = std::min(a, b);
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  if (small >= 10.0) {
    const double s = a + b;
    return kHalfLog2Pi - 0.5 * std::log(s) - (a - 0.5) * std::log1p(b / a) -
           (b - 0.5) * std::log1p(a / b) + stirling_remainder(a) + stirling_remainder(b) -
           stirling_remainder(s);
  }
  if (big >= 10.0) {
    // lgamma(big) - lgamma(big + small)
    const double diff = -(big - 0.5) * std::log1p(small / big) -
                        small * std::log(big + small) + small + stirling_remainder(big) -
                        stirling_remainder(big + small);
    return std::lgamma(small) + diff;
  }
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta function (modified Lentz).
// Near x = (a + 1) / (a + b + 2) with large a the fraction needs thousands of
// terms, so the recurrence runs in long double to keep the accumulated
// rounding below 1e-13.
inline double beta_continued_fraction(double a_in, double b_in, long double x_in) {
  using Ext = long double;
  constexpr Ext kTiny = 1e-300L;
  const Ext eps = std::numeric_limits<Ext>::epsilon();
  constexpr int kMaxIter = 200000;
  const Ext a = a_in, b = b_in, x = x_in;
  const Ext qab = a + b;
  const Ext qap = a + 1;
  const Ext qam = a - 1;
  Ext c = 1;
  Ext d = 1 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1 / d;
  Ext h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const Ext m2 = 2 * static_cast<Ext>(m);
    Ext aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const Ext del = d * c;
    h *= del;
    if (std::abs(del - 1) <= eps) return static_cast<double>(h);
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b). Both x and y = 1 - x are supplied
/// (with their logs) so callers can avoid cancellation in 1 - x. For large a
/// or b the result is sensitive to the last bits of x, hence the extended
/// precision arguments.
inline double regularized_beta(double a, double b, long double x, long double y,
                               long double log_x, long double log_y) {
  if (x <= 0) return 0.0;
  if (y <= 0) return 1.0;
  const long double log_front = a * log_x + b * log_y - detail::log_beta(a, b);
  if (x < (a + 1.0L) / (a + b + 2.0L)) {
    return static_cast<double>(std::exp(log_front) * detail::beta_continued_fraction(a, b, x) / a);
  }
  return static_cast<double>(1.0L - std::exp(log_front) *
                                        detail::beta_continued_fraction(b, a, y) / b);
}

inline double regularized_beta(double a, double b, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error("regularized_beta: x outside [0, 1]");
  const long double lx = x;
  return regularized_beta(a, b, lx, 1.0L - lx, std::log(lx), std::log1p(-lx));
}

/// Upper tail P(T > t) of Student's t with df degrees of freedom, t >= 0.
inline double t_sf(double t, double df) {
  if (!std::isfinite(t) || !std::isfinite(df)) throw Error("t_sf: non-finite input");
  if (!(df > 0.0)) throw Error("t_sf: degrees of freedom must be positive");
  if (t < 0.0) throw Error("t_sf: t must be non-negative");
  if (t == 0.0) return 0.5;
  // x = df / (df + t^2), y = t^2 / (df + t^2), computed without forming 1 - x.
  const long double r2 = static_cast<long double>(t) * t / df;
  const long double x = 1.0L / (1.0L + r2);
  const long double y = r2 / (1.0L + r2);
  const long double log_x = -std::log1p(r2);
  const long double log_y = std::log(r2) - std::log1p(r2);
  return 0.5 * regularized_beta(0.5 * df, 0.5, x, y, log_x, log_y);
}

struct WelchResult {
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};

inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error("welch_t_test needs at least two observations per sample");
  }
  const MeanStd sa = mean_std(a);
  const MeanStd sb = mean_std(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sa.std * sa.std / na;
  const double vb = sb.std * sb.std / nb;
  if (va + vb == 0.0) throw Error("welch_t_test: both samples have zero variance");
  WelchResult r;
  r.mean_a = sa.mean;
  r.mean_b = sb.mean;
  r.n_a = a.size();
  r.n_b = b.size();
  r.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p_two_sided = std::min(1.0, 2.0 * t_sf(std::abs(r.t), r.df));
  return r;
}

/// p-values below 1e-300 are reported symbolically.
inline std::string format_p_value(double p) {
  if (p < 1e-300) return "< 1e-300";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3g", p);
  return buf.data();
}

struct ConditionStats {
  ListenerGender listener_gender = ListenerGender::kMale;
  /// Absent for the pooled "Overall" row.
  std::optional<SpeakerGender> speaker_gender;
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

namespace detail {

inline std::vector<double> scores_where(const RatingTable& table, Split split,
                                        ListenerGender lg,
                                        std::optional<SpeakerGender> sg) {
  std::vector<double> out;
  for (std::size_t i : table.indices_for_split(split)) {
    const auto& r = table.records()[i];
    if (r.listener_gender != lg) continue;
    if (sg && r.speaker_gender != *sg) continue;
    out.push_back(static_cast<double>(r.score));
  }
  return out;
}

}  // namespace detail

/// Per listener gender x speaker gender rows over raw ratings, followed by
/// one pooled row per listener gender. Empty conditions are omitted.
inline std::vector<ConditionStats> condition_stats(const RatingTable& table, Split split) {
  std::vector<ConditionStats> out;
  auto emit = [&](ListenerGender lg, std::optional<SpeakerGender> sg) {
    const auto v = detail::scores_where(table, split, lg, sg);
    if (v.empty()) return;
    const MeanStd ms = mean_std(v);
    out.push_back({lg, sg, ms.mean, ms.std, v.size()});
  };
  for (ListenerGender lg : {ListenerGender::kMale, ListenerGender::kFemale}) {
    for (SpeakerGender sg : {SpeakerGender::kMale, SpeakerGender::kFemale}) emit(lg, sg);
  }
  for (ListenerGender lg : {ListenerGender::kMale, ListenerGender::kFemale}) {
    emit(lg, std::nullopt);
  }
  return out;
}

struct ListenerGenderTest {
  /// "Male speaker", "Female speaker", or "Overall".
  std::string condition;
  /// Sample a is male listeners, b is female listeners.
  WelchResult result;
};

/// Male-listener vs female-listener Welch tests on raw ratings for male
/// speakers, female speakers, and all speakers.
inline std::vector<ListenerGenderTest> listener_gender_tests(const RatingTable& table,
                                                             Split split) {
  std::vector<ListenerGenderTest> out;
  const std::array<std::pair<const char*, std::optional<SpeakerGender>>, 3> conds = {{
      {"Male speaker", SpeakerGender::kMale},
      {"Female speaker", SpeakerGender::kFemale},
      {"Overall", std::nullopt},
  }};
  for (const auto& [name, sg] : conds) {
    const auto m = detail::scores_where(table, split, ListenerGender::kMale, sg);
    const auto f = detail::scores_where(table, split, ListenerGender::kFemale, sg);
    try {
      out.push_back({name, welch_t_test(m, f)});
    } catch (const Error& e) {
      throw Error(std::string(name) + ": " + e.what());
    }
  }
  return out;
}

struct GapCell {
  std::optional<double> gap;
  std::size_t count = 0;
};

struct TierGapMatrix {
  /// Row 0 male speakers, row 1 female speakers; columns in tier order.
  std::array<std::array<GapCell, 4>, 2> cells{};
  std::array<GapCell, 4> column_means{};

  const GapCell& cell(SpeakerGender sg, QualityTier t) const {
    return cells[sg == SpeakerGender::kMale ? 0 : 1][static_cast<std::size_t>(t)];
  }
  const GapCell& column(QualityTier t) const {
    return column_means[static_cast<std::size_t>(t)];
  }
};

/// Mean per-utterance (mos_male - mos_female), bucketed by the tier of
/// mos_all and speaker gender. Utterances missing either gender mean are
/// skipped. Column means pool utterances of both speaker genders.
inline TierGapMatrix tier_gap_matrix(const std::vector<UtteranceScores>& scores) {
  std::array<std::array<CompensatedSum, 4>, 2> sums{};
  std::array<CompensatedSum, 4> col_sums{};
  TierGapMatrix m;
  for (const auto& s : scores) {
    if (!s.mos_male || !s.mos_female || !s.mos_all) continue;
    const auto t = static_cast<std::size_t>(tier_of(*s.mos_all));
    const std::size_t row = s.speaker_gender == SpeakerGender::kMale ? 0 : 1;
    const double gap = *s.mos_male - *s.mos_female;
    sums[row][t].add(gap);
    ++m.cells[row][t].count;
    col_sums[t].add(gap);
    ++m.column_means[t].count;
  }
  for (std::size_t row = 0; row < 2; ++row) {
    for (std::size_t t = 0; t < 4; ++t) {
      if (m.cells[row][t].count > 0) {
        m.cells[row][t].gap = sums[row][t].value() / static_cast<double>(m.cells[row][t].count);
      }
    }
  }
  for (std::size_t t = 0; t < 4; ++t) {
    if (m.column_means[t].count > 0) {
      m.column_means[t].gap = col_sums[t].value() / static_cast<double>(m.column_means[t].count);
    }
  }
  return m;
}

/// Sensitivity variant: per cell, the pooled per-rating male mean minus the
/// pooled per-rating female mean over utterances whose mos_all falls in the
/// tier. Counts are numbers of utterances in the cell.
inline TierGapMatrix tier_gap_matrix_pooled(const RatingTable& table, Split split) {
  const auto scores = aggregate_table(table, split);
  std::map<std::string, QualityTier> tier_by_utt;
  for (const auto& s : scores) tier_by_utt[s.utterance_id] = tier_of(*s.mos_all);

  struct Pool {
    CompensatedSum male, female;
    std::size_t n_male = 0, n_female = 0;
  };
  std::array<std::array<Pool, 4>, 2> pools{};
  std::array<Pool, 4> col_pools{};
  TierGapMatrix m;
  for (const auto& s : scores) {
    const auto t = static_cast<std::size_t>(tier_by_utt[s.utterance_id]);
    ++m.cells[s.speaker_gender == SpeakerGender::kMale ? 0 : 1][t].count;
    ++m.column_means[t].count;
  }
  for (std::size_t i : table.indices_for_split(split)) {
    const auto& r = table.records()[i];
    if (r.listener_gender == ListenerGender::kOther) continue;
    const auto t = static_cast<std::size_t>(tier_by_utt[r.utterance_id]);
    const std::size_t row = r.speaker_gender == SpeakerGender::kMale ? 0 : 1;
    for (Pool* p : {&pools[row][t], &col_pools[t]}) {
      if (r.listener_gender == ListenerGender::kMale) {
        p->male.add(r.score);
        ++p->n_male;
      } else {
        p->female.add(r.score);
        ++p->n_female;
      }
    }
  }
  auto finish = [](const Pool& p, GapCell& c) {
    if (p.n_male > 0 && p.n_female > 0) {
      c.gap = p.male.value() / static_cast<double>(p.n_male) -
              p.female.value() / static_cast<double>(p.n_female);
    }
  };
  for (std::size_t row = 0; row < 2; ++row) {
    for (std::size_t t = 0; t < 4; ++t) finish(pools[row][t], m.cells[row][t]);
  }
  for (std::size_t t = 0; t < 4; ++t) finish(col_pools[t], m.column_means[t]);
  return m;
}

}  // namespace genmos
