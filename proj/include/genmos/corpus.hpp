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

// Rating tables, feature tables, and the synthetic corpus generator.
//
// Ratings CSV (header required):
//   utterance_id,system_id,listener_id,listener_gender,speaker_gender,score,split
// Features CSV (no header):
//   utterance_id,f1,...,fd

#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "genmos/common.hpp"

namespace genmos {

struct RatingRecord {
  std::string utterance_id;
  std::string system_id;
  std::string listener_id;
  ListenerGender listener_gender = ListenerGender::kOther;
  SpeakerGender speaker_gender = SpeakerGender::kMale;
  int score = 0;
  Split split = Split::kTrain;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

inline constexpr std::string_view kRatingsHeader =
    "utterance_id,system_id,listener_id,listener_gender,speaker_gender,score,split";

/// Ordered rating records with per-utterance and per-split indices. Records
/// enter only through add(), which enforces the table invariants.
class RatingTable {
 public:
  /// Throws Error on a score outside 1..5, a duplicate (utterance, listener,
  /// split) triple, or an utterance that changes system or speaker gender.
  void add(RatingRecord r) {
    if (r.score < 1 || r.score > 5) throw Error("score out of range");
    auto [it, inserted] = utterance_meta_.try_emplace(
        r.utterance_id, UtteranceMeta{r.system_id, r.speaker_gender});
    if (!inserted) {
      if (it->second.system_id != r.system_id) {
        throw Error("utterance " + r.utterance_id + " mapped to two systems (" +
                    it->second.system_id + ", " + r.system_id + ")");
      }
      if (it->second.speaker_gender != r.speaker_gender) {
        throw Error("utterance " + r.utterance_id +
                    " has conflicting speaker genders");
      }
    }
    if (!pairs_.insert({r.utterance_id, r.listener_id, r.split}).second) {
      throw Error("duplicate rating for utterance " + r.utterance_id +
                  " by listener " + r.listener_id + " in split " +
                  std::string(to_string(r.split)));
    }
    const std::size_t idx = records_.size();
    by_utterance_[r.utterance_id].push_back(idx);
    by_split_[static_cast<std::size_t>(r.split)].push_back(idx);
    records_.push_back(std::move(r));
  }

  const std::vector<RatingRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Record indices for one utterance, in insertion order (all splits).
  const std::vector<std::size_t>& indices_for_utterance(const std::string& id) const {
    static const std::vector<std::size_t> kNone;
    auto it = by_utterance_.find(id);
    return it == by_utterance_.end() ? kNone : it->second;
  }

  /// Record indices for one split, in insertion order.
  const std::vector<std::size_t>& indices_for_split(Split s) const {
    return by_split_[static_cast<std::size_t>(s)];
  }

  std::size_t utterance_count() const { return utterance_meta_.size(); }

  friend bool operator==(const RatingTable& a, const RatingTable& b) {
    return a.records_ == b.records_;
  }

 private:
  struct UtteranceMeta {
    std::string system_id;
    SpeakerGender speaker_gender;
  };
  std::vector<RatingRecord> records_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_utterance_;
  std::array<std::vector<std::size_t>, 3> by_split_;
  std::unordered_map<std::string, UtteranceMeta> utterance_meta_;
  std::set<std::tuple<std::string, std::string, Split>> pairs_;
};

/// The records of a single split, in table order.
inline std::vector<RatingRecord> records_in_split(const RatingTable& table, Split s) {
  std::vector<RatingRecord> out;
  for (std::size_t i : table.indices_for_split(s)) out.push_back(table.records()[i]);
  return out;
}

namespace detail {

inline Error line_error(std::size_t line, const std::string& what) {
  return Error(what + ", line " + std::to_string(line));
}

/// Reads lines, strips CR, and skips blank lines. Calls f(line_no, text).
template <typename F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    f(line_no, std::string_view(line));
  }
}

}  // namespace detail

inline RatingTable parse_ratings(std::istream& in) {
  RatingTable table;
  bool saw_header = false;
  detail::for_each_line(in, [&](std::size_t line_no, std::string_view line) {
    if (!saw_header) {
      std::string_view header = line;
      // Tolerate a UTF-8 byte order mark.
      if (header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
      if (detail::trim(header) != kRatingsHeader) {
        throw detail::line_error(line_no, "unexpected ratings header");
      }
      saw_header = true;
      return;
    }
    const auto f = split_csv(line);
    if (f.size() != 7) {
      throw detail::line_error(line_no, "expected 7 fields, got " +
                                            std::to_string(f.size()));
    }
    RatingRecord r;
    r.utterance_id = std::string(detail::trim(f[0]));
    r.system_id = std::string(detail::trim(f[1]));
    r.listener_id = std::string(detail::trim(f[2]));
    if (r.utterance_id.empty() || r.system_id.empty() || r.listener_id.empty()) {
      throw detail::line_error(line_no, "empty identifier");
    }
    const auto lg = parse_listener_gender(f[3]);
    if (!lg) throw detail::line_error(line_no, "unknown listener gender code");
    const auto sg = parse_speaker_gender(f[4]);
    if (!sg) throw detail::line_error(line_no, "unknown speaker gender code");
    const auto score = parse_int(f[5]);
    if (!score) throw detail::line_error(line_no, "score is not an integer");
    if (*score < 1 || *score > 5) {
      throw detail::line_error(line_no, "score out of range");
    }
    const auto split = parse_split(f[6]);
    if (!split) throw detail::line_error(line_no, "unknown split");
    r.listener_gender = *lg;
    r.speaker_gender = *sg;
    r.score = static_cast<int>(*score);
    r.split = *split;
    try {
      table.add(std::move(r));
    } catch (const Error& e) {
      throw detail::line_error(line_no, e.what());
    }
  });
  if (!saw_header) throw Error("ratings input is empty (missing header)");
  return table;
}

inline void write_ratings(std::ostream& out, const RatingTable& table) {
  out << kRatingsHeader << '\n';
  for (const auto& r : table.records()) {
    out << r.utterance_id << ',' << r.system_id << ',' << r.listener_id << ','
        << to_string(r.listener_gender) << ',' << to_string(r.speaker_gender)
        << ',' << r.score << ',' << to_string(r.split) << '\n';
  }
}

struct ValidationIssue {
  std::string severity;
  std::string message;
};

struct ValidationReport {
  std::size_t n_records = 0;
  std::size_t n_utterances = 0;
  std::size_t n_systems = 0;
  double mean_male_raters_per_utt = 0.0;
  double mean_female_raters_per_utt = 0.0;
  std::vector<ValidationIssue> issues;
};

/// Summarizes a table, or only one split when given. Never throws.
inline ValidationReport validate(const RatingTable& table,
                                 std::optional<Split> split = std::nullopt) {
  ValidationReport rep;
  struct Counts {
    std::size_t male = 0;
    std::size_t female = 0;
  };
  std::map<std::string, Counts> per_utt;
  std::set<std::string> systems;
  for (const auto& r : table.records()) {
    if (split && r.split != *split) continue;
    ++rep.n_records;
    systems.insert(r.system_id);
    auto& c = per_utt[r.utterance_id];
    if (r.listener_gender == ListenerGender::kMale) ++c.male;
    if (r.listener_gender == ListenerGender::kFemale) ++c.female;
  }
  rep.n_utterances = per_utt.size();
  rep.n_systems = systems.size();
  if (per_utt.empty()) return rep;
  std::size_t male_total = 0;
  std::size_t female_total = 0;
  for (const auto& [id, c] : per_utt) {
    male_total += c.male;
    female_total += c.female;
    if (c.male == 0) rep.issues.push_back({"warn", "utterance " + id + " has no male rater"});
    if (c.female == 0) {
      rep.issues.push_back({"warn", "utterance " + id + " has no female rater"});
    }
  }
  const auto n = static_cast<double>(per_utt.size());
  rep.mean_male_raters_per_utt = static_cast<double>(male_total) / n;
  rep.mean_female_raters_per_utt = static_cast<double>(female_total) / n;
  return rep;
}

/// Fixed-dimension feature vectors keyed by utterance.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error("feature dimension must be positive");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }

  void set(const std::string& id, std::vector<double> v) {
    if (dim_ == 0) throw Error("feature table has no dimension");
    if (v.size() != dim_) {
      throw Error("feature vector for " + id + " has dimension " +
                  std::to_string(v.size()) + ", expected " + std::to_string(dim_));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw Error("non-finite feature value for " + id);
    }
    if (!rows_.contains(id)) order_.push_back(id);
    rows_[id] = std::move(v);
  }

  bool contains(const std::string& id) const { return rows_.contains(id); }

  const std::vector<double>& at(const std::string& id) const {
    auto it = rows_.find(id);
    if (it == rows_.end()) throw Error("no features for utterance " + id);
    return it->second;
  }

  /// Utterance ids in insertion order.
  const std::vector<std::string>& ids() const { return order_; }

  friend bool operator==(const FeatureTable& a, const FeatureTable& b) {
    return a.dim_ == b.dim_ && a.order_ == b.order_ && a.rows_ == b.rows_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<double>> rows_;
};

inline FeatureTable parse_features(std::istream& in) {
  std::optional<FeatureTable> table;
  detail::for_each_line(in, [&](std::size_t line_no, std::string_view line) {
    const auto f = split_csv(line);
    if (f.size() < 2) throw detail::line_error(line_no, "feature row needs an id and at least one value");
    const std::size_t d = f.size() - 1;
    if (!table) table.emplace(d);
    if (d != table->dim()) {
      throw detail::line_error(line_no, "inconsistent feature arity: expected " +
                                            std::to_string(table->dim()) +
                                            " values, got " + std::to_string(d));
    }
    std::vector<double> v;
    v.reserve(d);
    for (std::size_t i = 1; i < f.size(); ++i) {
      const auto x = parse_double(f[i]);
      if (!x) throw detail::line_error(line_no, "malformed feature value");
      if (!std::isfinite(*x)) throw detail::line_error(line_no, "non-finite feature value");
      v.push_back(*x);
    }
    const std::string id(detail::trim(f[0]));
    if (id.empty()) throw detail::line_error(line_no, "empty utterance id");
    if (table->contains(id)) throw detail::line_error(line_no, "duplicate utterance id " + id);
    table->set(id, std::move(v));
  });
  if (!table) throw Error("feature input is empty");
  return std::move(*table);
}

inline void write_features(std::ostream& out, const FeatureTable& table) {
  for (const auto& id : table.ids()) {
    out << id;
    for (double x : table.at(id)) out << ',' << format_double(x);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SynthConfig {
  std::size_t n_systems = 200;
  std::size_t utterances_per_system = 6;
  std::size_t raters_male_per_utt = 4;
  std::size_t raters_female_per_utt = 4;
  /// Male-minus-female rating offset at true quality 1.0 and at 5.0.
  double gap_low_quality = 0.3;
  double gap_high_quality = 0.0;
  double rater_noise_std = 0.6;
  std::size_t feature_dim = 8;
  double feature_noise_std = 0.2;
  /// Per-utterance split probabilities; the remainder goes to train.
  double dev_fraction = 0.15;
  double test_fraction = 0.15;
};

inline void check(const SynthConfig& c) {
  if (c.n_systems == 0) throw Error("n_systems must be positive");
  if (c.utterances_per_system == 0) throw Error("utterances_per_system must be positive");
  if (c.raters_male_per_utt + c.raters_female_per_utt == 0) {
    throw Error("at least one male or female rater per utterance is required");
  }
  if (c.feature_dim == 0) throw Error("feature_dim must be positive");
  for (double v : {c.gap_low_quality, c.gap_high_quality}) {
    if (!std::isfinite(v)) throw Error("gap offsets must be finite");
  }
  for (double v : {c.rater_noise_std, c.feature_noise_std}) {
    if (!std::isfinite(v) || v < 0.0) throw Error("noise stds must be finite and >= 0");
  }
  if (!(c.dev_fraction >= 0.0 && c.test_fraction >= 0.0 &&
        c.dev_fraction + c.test_fraction <= 1.0)) {
    throw Error("split fractions must be non-negative and sum to at most 1");
  }
}

struct TruthRow {
  std::string utterance_id;
  std::string system_id;
  double true_quality = 0.0;
  double male_offset = 0.0;
};

using TruthTable = std::vector<TruthRow>;

struct SyntheticCorpus {
  RatingTable ratings;
  FeatureTable features;
  TruthTable truth;
};

/// Male-minus-female offset at quality q, linear between the two anchors.
inline double synthetic_offset(const SynthConfig& c, double q) {
  return c.gap_high_quality +
         (c.gap_low_quality - c.gap_high_quality) * (5.0 - q) / 4.0;
}

/// One simulated Likert response: round, then clamp to 1..5.
inline int synthetic_score(double latent) {
  return static_cast<int>(std::clamp(std::round(latent), 1.0, 5.0));
}

inline SyntheticCorpus generate_synthetic(const SynthConfig& c, std::uint64_t seed) {
  check(c);
  // Separate streams so feature draws do not perturb rating draws.
  Rng rating_rng(derive_seed(seed, 0));
  Rng feature_rng(derive_seed(seed, 1));
  Rng split_rng(derive_seed(seed, 2));

  const std::size_t male_pool = std::max<std::size_t>(40, c.raters_male_per_utt);
  const std::size_t female_pool = std::max<std::size_t>(40, c.raters_female_per_utt);
  auto pick_listeners = [&](std::size_t pool, std::size_t k) {
    std::vector<std::size_t> ids(pool);
    for (std::size_t i = 0; i < pool; ++i) ids[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(ids[i], ids[i + rating_rng.below(pool - i)]);
    }
    ids.resize(k);
    return ids;
  };
  auto pad = [](std::size_t v, int width) {
    std::string s = std::to_string(v);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
  };

  SyntheticCorpus out;
  out.features = FeatureTable(c.feature_dim);
  for (std::size_t s = 0; s < c.n_systems; ++s) {
    const std::string sys = "sys" + pad(s, 4);
    const double q_sys = rating_rng.uniform(1.2, 4.8);
    for (std::size_t u = 0; u < c.utterances_per_system; ++u) {
      const std::string utt = sys + "-utt" + pad(u, 3);
      const double q = std::clamp(q_sys + rating_rng.normal(0.0, 0.15), 1.0, 5.0);
      const double delta = synthetic_offset(c, q);
      const SpeakerGender spk =
          rating_rng.uniform() < 0.5 ? SpeakerGender::kMale : SpeakerGender::kFemale;
      const double split_draw = split_rng.uniform();
      const Split split = split_draw < c.dev_fraction ? Split::kDev
                          : split_draw < c.dev_fraction + c.test_fraction
                              ? Split::kTest
                              : Split::kTrain;

      for (std::size_t id : pick_listeners(male_pool, c.raters_male_per_utt)) {
        const double latent = q + delta / 2.0 + rating_rng.normal(0.0, c.rater_noise_std);
        out.ratings.add({utt, sys, "lm" + pad(id, 3), ListenerGender::kMale, spk,
                         synthetic_score(latent), split});
      }
      for (std::size_t id : pick_listeners(female_pool, c.raters_female_per_utt)) {
        const double latent = q - delta / 2.0 + rating_rng.normal(0.0, c.rater_noise_std);
        out.ratings.add({utt, sys, "lf" + pad(id, 3), ListenerGender::kFemale, spk,
                         synthetic_score(latent), split});
      }

      std::vector<double> feat(c.feature_dim);
      feat[0] = q + feature_rng.normal(0.0, c.feature_noise_std);
      for (std::size_t k = 1; k < c.feature_dim; ++k) feat[k] = feature_rng.normal();
      out.features.set(utt, std::move(feat));
      out.truth.push_back({utt, sys, q, delta});
    }
  }
  return out;
}

inline void write_truth(std::ostream& out, const TruthTable& truth) {
  out << "utterance_id,system_id,true_quality,male_offset\n";
  for (const auto& t : truth) {
    out << t.utterance_id << ',' << t.system_id << ',' << format_double(t.true_quality)
        << ',' << format_double(t.male_offset) << '\n';
  }
}

// ---------------------------------------------------------------------------
// SHEET / BVCC metadata adapter

/// Maps a per-utterance speaker gender file (`utterance_id,speaker_gender`,
/// optional header) into a lookup. Wav suffixes and directories are stripped.
inline std::string normalize_utterance_id(std::string_view s) {
  s = detail::trim(s);
  const auto slash = s.find_last_of('/');
  if (slash != std::string_view::npos) s.remove_prefix(slash + 1);
  if (s.size() > 4 && detail::upper(s.substr(s.size() - 4)) == ".WAV") s.remove_suffix(4);
  return std::string(s);
}

inline std::map<std::string, SpeakerGender> parse_speaker_genders(std::istream& in) {
  std::map<std::string, SpeakerGender> out;
  detail::for_each_line(in, [&](std::size_t line_no, std::string_view line) {
    const auto f = split_csv(line);
    if (f.size() != 2) throw detail::line_error(line_no, "expected utterance_id,speaker_gender");
    std::string g = detail::upper(detail::trim(f[1]));
    if (line_no == 1 && g == "SPEAKER_GENDER") return;
    if (g == "MALE") g = "M";
    if (g == "FEMALE") g = "F";
    const auto sg = parse_speaker_gender(g);
    if (!sg) throw detail::line_error(line_no, "unknown speaker gender");
    out[normalize_utterance_id(f[0])] = *sg;
  });
  return out;
}

/// Interprets a free-form gender word (M, F, male, female, ...).
inline ListenerGender listener_gender_from_word(std::string_view w) {
  const std::string u = detail::upper(detail::trim(w));
  if (u == "M" || u == "MALE" || u == "MAN") return ListenerGender::kMale;
  if (u == "F" || u == "FEMALE" || u == "WOMAN") return ListenerGender::kFemale;
  return ListenerGender::kOther;
}

struct SheetAdapterOptions {
  /// Split assigned to rows when the input has no split column.
  Split split = Split::kTrain;
  /// Speaker gender per utterance; required when the input lacks a
  /// speaker_gender column.
  std::map<std::string, SpeakerGender> speaker_genders;
};

/// Converts SHEET/BVCC per-rating metadata into a canonical RatingTable.
///
/// Two layouts are recognized:
///  * headed CSV whose header names (any order) include an utterance column
///    (utterance_id | wav_name | sample_id), system_id, score (or rating),
///    listener_id (or listener_name), and a listener gender column
///    (listener_gender | gender); speaker_gender and split are optional.
///  * the headerless BVCC sets layout
///    `system_id,wav_name,score,<ignored>,listener_info`, where listener_info
///    is an underscore-separated record containing a gender word. The whole
///    listener_info string serves as the listener id.
inline RatingTable adapt_sheet(std::istream& in, const SheetAdapterOptions& opt) {
  RatingTable table;
  bool first = true;
  bool headed = false;
  std::map<std::string, std::size_t> col;
  auto find_col = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
    for (const char* n : names) {
      auto it = col.find(n);
      if (it != col.end()) return it->second;
    }
    return std::nullopt;
  };
  std::optional<std::size_t> c_utt, c_sys, c_score, c_listener, c_lgender, c_sgender, c_split;

  auto speaker_gender_for = [&](const std::string& utt, std::size_t line_no) {
    auto it = opt.speaker_genders.find(utt);
    if (it == opt.speaker_genders.end()) {
      throw detail::line_error(line_no, "no speaker gender for utterance " + utt);
    }
    return it->second;
  };

  detail::for_each_line(in, [&](std::size_t line_no, std::string_view line) {
    const auto f = split_csv(line);
    if (first) {
      first = false;
      for (std::size_t i = 0; i < f.size(); ++i) {
        col[std::string(detail::trim(f[i]))] = i;
      }
      c_utt = find_col({"utterance_id", "wav_name", "sample_id"});
      c_sys = find_col({"system_id", "sys_id"});
      c_score = find_col({"score", "rating"});
      c_listener = find_col({"listener_id", "listener_name"});
      c_lgender = find_col({"listener_gender", "gender"});
      c_sgender = find_col({"speaker_gender"});
      c_split = find_col({"split"});
      headed = c_utt && c_sys && c_score;
      if (headed) {
        if (!c_listener || !c_lgender) {
          throw detail::line_error(line_no, "header lacks listener id or listener gender column");
        }
        return;
      }
    }
    RatingRecord r;
    std::optional<long long> score;
    if (headed) {
      const std::size_t need =
          std::max({*c_utt, *c_sys, *c_score, *c_listener, *c_lgender,
                    c_sgender.value_or(0), c_split.value_or(0)}) + 1;
      if (f.size() < need) throw detail::line_error(line_no, "too few fields");
      r.utterance_id = normalize_utterance_id(f[*c_utt]);
      r.system_id = std::string(detail::trim(f[*c_sys]));
      r.listener_id = std::string(detail::trim(f[*c_listener]));
      r.listener_gender = listener_gender_from_word(f[*c_lgender]);
      score = parse_int(f[*c_score]);
      if (c_sgender) {
        std::string g = detail::upper(detail::trim(f[*c_sgender]));
        if (g == "MALE") g = "M";
        if (g == "FEMALE") g = "F";
        const auto sg = parse_speaker_gender(g);
        if (!sg) throw detail::line_error(line_no, "unknown speaker gender");
        r.speaker_gender = *sg;
      } else {
        r.speaker_gender = speaker_gender_for(r.utterance_id, line_no);
      }
      if (c_split) {
        const auto sp = parse_split(f[*c_split]);
        if (!sp) throw detail::line_error(line_no, "unknown split");
        r.split = *sp;
      } else {
        r.split = opt.split;
      }
    } else {
      if (f.size() != 5) {
        throw detail::line_error(line_no, "expected 5 fields in BVCC sets layout, got " +
                                              std::to_string(f.size()));
      }
      r.system_id = std::string(detail::trim(f[0]));
      r.utterance_id = normalize_utterance_id(f[1]);
      score = parse_int(f[2]);
      const std::string info(detail::trim(f[4]));
      r.listener_id = info;
      r.listener_gender = ListenerGender::kOther;
      std::size_t start = 0;
      while (start <= info.size()) {
        const std::size_t end = std::min(info.find('_', start), info.size());
        const auto g = listener_gender_from_word(std::string_view(info).substr(start, end - start));
        if (g != ListenerGender::kOther) {
          r.listener_gender = g;
          break;
        }
        start = end + 1;
      }
      r.speaker_gender = speaker_gender_for(r.utterance_id, line_no);
      r.split = opt.split;
    }
    if (!score) throw detail::line_error(line_no, "score is not an integer");
    if (*score < 1 || *score > 5) throw detail::line_error(line_no, "score out of range");
    if (r.utterance_id.empty() || r.system_id.empty() || r.listener_id.empty()) {
      throw detail::line_error(line_no, "empty identifier");
    }
    r.score = static_cast<int>(*score);
    try {
      table.add(std::move(r));
    } catch (const Error& e) {
      throw detail::line_error(line_no, e.what());
    }
  });
  return table;
}

}  // namespace genmos
