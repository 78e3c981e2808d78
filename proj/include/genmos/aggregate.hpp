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

// Per-utterance MOS (overall and per listener gender), per-system means, and
// quality tiers.

#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "genmos/common.hpp"
#include "genmos/corpus.hpp"

namespace genmos {

struct UtteranceScores {
  std::string utterance_id;
  std::string system_id;
  SpeakerGender speaker_gender = SpeakerGender::kMale;
  std::optional<double> mos_all;
  std::optional<double> mos_male;
  std::optional<double> mos_female;
  std::size_t n_all = 0;
  std::size_t n_male = 0;
  std::size_t n_female = 0;
};

/// Which per-utterance score a caller wants.
enum class Channel { kAll, kMale, kFemale };

inline std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::kAll: return "All";
    case Channel::kMale: return "Male";
    case Channel::kFemale: return "Female";
  }
  return "?";
}

inline const std::optional<double>& channel_value(const UtteranceScores& s, Channel c) {
  switch (c) {
    case Channel::kMale: return s.mos_male;
    case Channel::kFemale: return s.mos_female;
    case Channel::kAll: break;
  }
  return s.mos_all;
}

/// Mean of all ratings plus the male and female subset means. "O" listeners
/// count toward mos_all only.
template <typename Records>
UtteranceScores aggregate_utterance(const Records& ratings) {
  auto it = std::begin(ratings);
  if (it == std::end(ratings)) throw Error("aggregate_utterance needs at least one rating");
  UtteranceScores out;
  out.utterance_id = it->utterance_id;
  out.system_id = it->system_id;
  out.speaker_gender = it->speaker_gender;
  CompensatedSum all, male, female;
  for (const RatingRecord& r : ratings) {
    if (r.utterance_id != out.utterance_id) {
      throw Error("aggregate_utterance given mixed utterance ids (" + out.utterance_id +
                  ", " + r.utterance_id + ")");
    }
    const auto v = static_cast<double>(r.score);
    all.add(v);
    ++out.n_all;
    if (r.listener_gender == ListenerGender::kMale) {
      male.add(v);
      ++out.n_male;
    } else if (r.listener_gender == ListenerGender::kFemale) {
      female.add(v);
      ++out.n_female;
    }
  }
  out.mos_all = all.value() / static_cast<double>(out.n_all);
  if (out.n_male > 0) out.mos_male = male.value() / static_cast<double>(out.n_male);
  if (out.n_female > 0) out.mos_female = female.value() / static_cast<double>(out.n_female);
  return out;
}

/// One entry per utterance in the split, ordered by utterance_id.
inline std::vector<UtteranceScores> aggregate_table(const RatingTable& table, Split split) {
  std::map<std::string, std::vector<RatingRecord>> groups;
  for (std::size_t i : table.indices_for_split(split)) {
    const auto& r = table.records()[i];
    groups[r.utterance_id].push_back(r);
  }
  std::vector<UtteranceScores> out;
  out.reserve(groups.size());
  for (const auto& [id, recs] : groups) out.push_back(aggregate_utterance(recs));
  return out;
}

struct SystemScores {
  std::string system_id;
  double mean = 0.0;
  std::size_t n_utterances = 0;
};

/// Unweighted mean of per-utterance scores within each system, ordered by
/// system_id.
inline std::vector<SystemScores> aggregate_systems(
    const std::vector<std::pair<std::string, double>>& per_utterance) {
  std::map<std::string, std::pair<CompensatedSum, std::size_t>> acc;
  for (const auto& [sys, v] : per_utterance) {
    auto& a = acc[sys];
    a.first.add(v);
    ++a.second;
  }
  std::vector<SystemScores> out;
  out.reserve(acc.size());
  for (const auto& [sys, a] : acc) {
    out.push_back({sys, a.first.value() / static_cast<double>(a.second), a.second});
  }
  return out;
}

enum class QualityTier { kPoor = 0, kAverage = 1, kGood = 2, kExcellent = 3 };

inline constexpr std::array<QualityTier, 4> kAllTiers = {
    QualityTier::kPoor, QualityTier::kAverage, QualityTier::kGood, QualityTier::kExcellent};

inline std::string_view to_string(QualityTier t) {
  switch (t) {
    case QualityTier::kPoor: return "Poor";
    case QualityTier::kAverage: return "Average";
    case QualityTier::kGood: return "Good";
    case QualityTier::kExcellent: return "Excellent";
  }
  return "?";
}

/// [1,2) Poor, [2,3) Average, [3,4) Good, [4,5] Excellent.
inline QualityTier tier_of(double mos) {
  if (!(mos >= 1.0 && mos <= 5.0)) {
    throw Error("MOS " + format_double(mos) + " outside [1, 5]");
  }
  if (mos < 2.0) return QualityTier::kPoor;
  if (mos < 3.0) return QualityTier::kAverage;
  if (mos < 4.0) return QualityTier::kGood;
  return QualityTier::kExcellent;
}

inline constexpr std::string_view kUtteranceScoresHeader =
    "utterance_id,system_id,speaker_gender,mos_all,mos_male,mos_female,n_all,n_male,n_female";

inline void write_utterance_scores(std::ostream& out,
                                   const std::vector<UtteranceScores>& scores) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  out << kUtteranceScoresHeader << '\n';
  for (const auto& s : scores) {
    out << s.utterance_id << ',' << s.system_id << ',' << to_string(s.speaker_gender) << ','
        << opt(s.mos_all) << ',' << opt(s.mos_male) << ',' << opt(s.mos_female) << ','
        << s.n_all << ',' << s.n_male << ',' << s.n_female << '\n';
  }
}

}  // namespace genmos
