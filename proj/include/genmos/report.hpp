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

// JSON, markdown and CSV renderings of analysis and training results.

#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "genmos/aggregate.hpp"
#include "genmos/corpus.hpp"
#include "genmos/metrics.hpp"
#include "genmos/stats.hpp"
#include "genmos/trainer.hpp"

namespace genmos {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Markdown tables

/// Display width of a UTF-8 string (code points, not bytes).
inline std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

/// A markdown table whose columns are padded to a common width.
class MarkdownTable {
 public:
  explicit MarkdownTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    row.resize(header_.size());
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::vector<std::size_t> width(header_.size(), 3);
    for (std::size_t c = 0; c < header_.size(); ++c) {
      width[c] = std::max(width[c], display_width(header_[c]));
      for (const auto& r : rows_) width[c] = std::max(width[c], display_width(r[c]));
    }
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
      out << '|';
      for (std::size_t c = 0; c < cells.size(); ++c) {
        out << ' ' << cells[c] << std::string(width[c] - display_width(cells[c]), ' ') << " |";
      }
      out << '\n';
    };
    line(header_);
    out << '|';
    for (std::size_t w : width) out << ' ' << std::string(w, '-') << " |";
    out << '\n';
    for (const auto& r : rows_) line(r);
    return out.str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string fixed(double v, int digits = 3) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", digits, v);
  return buf.data();
}

inline std::string gender_word(ListenerGender g) {
  return g == ListenerGender::kMale ? "Male" : g == ListenerGender::kFemale ? "Female" : "Other";
}

inline std::string gender_word(SpeakerGender g) {
  return g == SpeakerGender::kMale ? "Male" : "Female";
}

// ---------------------------------------------------------------------------
// corpus

inline Json to_json(const ValidationReport& r) {
  Json issues = Json::array();
  for (const auto& i : r.issues) issues.push_back({{"severity", i.severity}, {"message", i.message}});
  return {{"n_records", r.n_records},
          {"n_utterances", r.n_utterances},
          {"n_systems", r.n_systems},
          {"mean_male_raters_per_utt", r.mean_male_raters_per_utt},
          {"mean_female_raters_per_utt", r.mean_female_raters_per_utt},
          {"issues", issues}};
}

inline std::string to_markdown(const ValidationReport& r) {
  MarkdownTable t({"Records", "Utterances", "Systems", "Male raters/utt", "Female raters/utt",
                   "Warnings"});
  t.add_row({std::to_string(r.n_records), std::to_string(r.n_utterances),
             std::to_string(r.n_systems), fixed(r.mean_male_raters_per_utt, 2),
             fixed(r.mean_female_raters_per_utt, 2), std::to_string(r.issues.size())});
  return t.str();
}

inline std::string to_csv(const ValidationReport& r) {
  std::ostringstream out;
  out << "n_records,n_utterances,n_systems,mean_male_raters_per_utt,mean_female_raters_per_utt,"
         "n_issues\n"
      << r.n_records << ',' << r.n_utterances << ',' << r.n_systems << ','
      << format_double(r.mean_male_raters_per_utt) << ','
      << format_double(r.mean_female_raters_per_utt) << ',' << r.issues.size() << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// stats

inline Json to_json(const std::vector<ConditionStats>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"listener_gender", std::string(to_string(r.listener_gender))},
                   {"speaker_gender", r.speaker_gender
                                          ? std::string(to_string(*r.speaker_gender))
                                          : std::string("Overall")},
                   {"mean", r.mean},
                   {"std", r.std},
                   {"count", r.count}});
  }
  return out;
}

/// Listener | Speaker | Mean | Std | Count, cell rows only.
inline std::string condition_markdown(const std::vector<ConditionStats>& rows) {
  MarkdownTable t({"Listener", "Speaker", "Mean", "Std", "Count"});
  for (const auto& r : rows) {
    t.add_row({gender_word(r.listener_gender),
               r.speaker_gender ? gender_word(*r.speaker_gender) : std::string("Overall"),
               fixed(r.mean), fixed(r.std), std::to_string(r.count)});
  }
  return t.str();
}

inline std::string condition_csv(const std::vector<ConditionStats>& rows) {
  std::ostringstream out;
  out << "listener_gender,speaker_gender,mean,std,count\n";
  for (const auto& r : rows) {
    out << to_string(r.listener_gender) << ','
        << (r.speaker_gender ? std::string(to_string(*r.speaker_gender)) : "Overall") << ','
        << format_double(r.mean) << ',' << format_double(r.std) << ',' << r.count << '\n';
  }
  return out.str();
}

inline Json to_json(const WelchResult& w) {
  return {{"mean_a", w.mean_a}, {"mean_b", w.mean_b}, {"n_a", w.n_a},  {"n_b", w.n_b},
          {"t", w.t},           {"df", w.df},         {"p_two_sided", w.p_two_sided},
          {"p_display", format_p_value(w.p_two_sided)}};
}

inline Json to_json(const std::vector<ListenerGenderTest>& tests) {
  Json out = Json::array();
  for (const auto& t : tests) {
    out.push_back({{"condition", t.condition},
                   {"male_listener_mean", t.result.mean_a},
                   {"female_listener_mean", t.result.mean_b},
                   {"welch", to_json(t.result)}});
  }
  return out;
}

/// Condition | Male Listener | Female Listener | p.
inline std::string welch_markdown(const std::vector<ListenerGenderTest>& tests) {
  MarkdownTable t({"Condition", "Male Listener", "Female Listener", "t", "df", "p"});
  for (const auto& w : tests) {
    t.add_row({w.condition, fixed(w.result.mean_a), fixed(w.result.mean_b), fixed(w.result.t, 3),
               fixed(w.result.df, 1), format_p_value(w.result.p_two_sided)});
  }
  return t.str();
}

inline std::string welch_csv(const std::vector<ListenerGenderTest>& tests) {
  std::ostringstream out;
  out << "condition,male_listener_mean,female_listener_mean,n_male,n_female,t,df,p_two_sided\n";
  for (const auto& w : tests) {
    out << w.condition << ',' << format_double(w.result.mean_a) << ','
        << format_double(w.result.mean_b) << ',' << w.result.n_a << ',' << w.result.n_b << ','
        << format_double(w.result.t) << ',' << format_double(w.result.df) << ','
        << format_double(w.result.p_two_sided) << '\n';
  }
  return out.str();
}

inline Json gap_json(const GapCell& c) {
  return c.gap ? Json(*c.gap) : Json(nullptr);
}

inline Json to_json(const TierGapMatrix& m, const std::string& semantics = "per_utterance") {
  Json cells = Json::array();
  for (SpeakerGender sg : {SpeakerGender::kMale, SpeakerGender::kFemale}) {
    for (QualityTier t : kAllTiers) {
      const auto& c = m.cell(sg, t);
      cells.push_back({{"speaker_gender", std::string(to_string(sg))},
                       {"tier", std::string(to_string(t))},
                       {"gap", gap_json(c)},
                       {"count", c.count}});
    }
  }
  Json cols = Json::array();
  for (QualityTier t : kAllTiers) {
    cols.push_back({{"tier", std::string(to_string(t))},
                    {"gap", gap_json(m.column(t))},
                    {"count", m.column(t).count}});
  }
  return {{"semantics", semantics}, {"cells", cells}, {"column_means", cols}};
}

inline std::string tiers_markdown(const TierGapMatrix& m) {
  MarkdownTable t({"Speaker", "Poor (1-2)", "Average (2-3)", "Good (3-4)", "Excellent (4-5)"});
  auto cell = [](const GapCell& c) {
    return c.gap ? fixed(*c.gap) + " (n=" + std::to_string(c.count) + ")" : std::string("-");
  };
  for (SpeakerGender sg : {SpeakerGender::kMale, SpeakerGender::kFemale}) {
    std::vector<std::string> row{gender_word(sg)};
    for (QualityTier q : kAllTiers) row.push_back(cell(m.cell(sg, q)));
    t.add_row(row);
  }
  std::vector<std::string> row{"Mean"};
  for (QualityTier q : kAllTiers) row.push_back(cell(m.column(q)));
  t.add_row(row);
  return t.str();
}

/// Heatmap-ready rows: tier,speaker_gender,gap,count (empty gap when absent).
inline std::string tiers_csv(const TierGapMatrix& m) {
  std::ostringstream out;
  out << "tier,speaker_gender,gap,count\n";
  for (QualityTier q : kAllTiers) {
    for (SpeakerGender sg : {SpeakerGender::kMale, SpeakerGender::kFemale}) {
      const auto& c = m.cell(sg, q);
      out << to_string(q) << ',' << to_string(sg) << ','
          << (c.gap ? format_double(*c.gap) : std::string()) << ',' << c.count << '\n';
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// metrics

inline Json to_json(const MetricSet& m) {
  return {{"lcc", m.lcc}, {"srcc", m.srcc}, {"mse", m.mse}, {"ktau", m.ktau}};
}

inline Json to_json(const EvalReport& r) {
  return {{"ground_truth_set", std::string(to_string(r.ground_truth_set))},
          {"n_utterances", r.n_utterances},
          {"n_systems", r.n_systems},
          {"utterance_level", to_json(r.utterance_level)},
          {"system_level", to_json(r.system_level)}};
}

inline std::vector<std::string> metric_cells(const MetricSet& m) {
  return {fixed(m.lcc), fixed(m.srcc), fixed(m.mse), fixed(m.ktau)};
}

inline const std::vector<std::string>& level_metric_header() {
  static const std::vector<std::string> kHeader = {
      "Utt LCC", "Utt SRCC", "Utt MSE", "Utt KTAU", "Sys LCC", "Sys SRCC", "Sys MSE", "Sys KTAU"};
  return kHeader;
}

/// GT | utterance LCC SRCC MSE KTAU | system LCC SRCC MSE KTAU.
inline std::string eval_markdown(const std::vector<EvalReport>& reports) {
  std::vector<std::string> header{"GT"};
  for (const auto& h : level_metric_header()) header.push_back(h);
  MarkdownTable t(header);
  for (const auto& r : reports) {
    std::vector<std::string> row{std::string(to_string(r.ground_truth_set))};
    for (auto& c : metric_cells(r.utterance_level)) row.push_back(c);
    for (auto& c : metric_cells(r.system_level)) row.push_back(c);
    t.add_row(row);
  }
  return t.str();
}

inline std::string eval_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "ground_truth_set,level,lcc,srcc,mse,ktau,n\n";
  for (const auto& r : reports) {
    for (auto [level, m, n] : {std::tuple{"utterance", r.utterance_level, r.n_utterances},
                               std::tuple{"system", r.system_level, r.n_systems}}) {
      out << to_string(r.ground_truth_set) << ',' << level << ',' << format_double(m.lcc) << ','
          << format_double(m.srcc) << ',' << format_double(m.mse) << ','
          << format_double(m.ktau) << ',' << n << '\n';
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// training

inline Json to_json(const ModelDims& d) {
  return {{"d", d.d}, {"h", d.h}, {"e", d.e}, {"g", d.g}, {"gender_hidden", d.gender_hidden}};
}

inline Json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"max_steps", c.max_steps},
          {"batch_size", c.batch_size},
          {"eval_every", c.eval_every},
          {"patience", c.patience},
          {"seed", c.seed},
          {"enable_gender_branch", c.enable_gender_branch},
          {"clip_predictions", c.clip_predictions},
          {"dims", to_json(c.dims)}};
}

inline Json to_json(const TrainHistory& h) {
  Json evals = Json::array();
  for (const auto& e : h.evals) {
    evals.push_back({{"step", e.step},
                     {"train_loss", e.train_loss},
                     {"dev_utterance_metrics",
                      e.dev_utterance_metrics ? to_json(*e.dev_utterance_metrics) : Json(nullptr)},
                     {"dev_system_srcc", e.dev_system_srcc ? Json(*e.dev_system_srcc) : Json(nullptr)},
                     {"best_so_far", e.best_so_far}});
  }
  Json out = {{"evals", evals},
              {"stopping_reason", std::string(to_string(h.stopping_reason))},
              {"best_index", h.best_index}};
  if (!h.evals.empty()) {
    out["best_step"] = h.best().step;
    out["best_dev_system_srcc"] =
        h.best().dev_system_srcc ? Json(*h.best().dev_system_srcc) : Json(nullptr);
  }
  return out;
}

inline Json to_json(const RelativeGaps& g) {
  return {{"utterance_mse_pct", g.utterance_mse_pct}, {"system_mse_pct", g.system_mse_pct}};
}

namespace detail {

inline std::vector<std::string> models_of(const std::vector<AggregateRow>& rows) {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
  }
  return out;
}

}  // namespace detail

inline Json to_json(const BiasReport& rep) {
  Json runs = Json::array();
  const auto models = detail::models_of(rep.aggregate);
  for (const auto& run : rep.runs) {
    Json rows = Json::array();
    for (const auto& r : run.rows) {
      rows.push_back({{"model", r.model},
                      {"prediction", std::string(branch_name(r.prediction))},
                      {"ground_truth", std::string(to_string(r.report.ground_truth_set))},
                      {"report", to_json(r.report)}});
    }
    Json gaps = Json::object();
    for (const auto& m : models) gaps[m] = to_json(relative_gaps(run, m));
    runs.push_back({{"seed", run.seed}, {"rows", rows}, {"relative_gaps", gaps}});
  }
  Json agg = Json::array();
  for (const auto& r : rep.aggregate) {
    agg.push_back({{"model", r.model},
                   {"prediction", std::string(branch_name(r.prediction))},
                   {"ground_truth", std::string(to_string(r.ground_truth))},
                   {"utterance_level",
                    {{"mean", to_json(r.utterance_level.mean)}, {"std", to_json(r.utterance_level.std)}}},
                   {"system_level",
                    {{"mean", to_json(r.system_level.mean)}, {"std", to_json(r.system_level.std)}}}});
  }
  Json gaps = Json::object();
  for (const auto& m : models) gaps[m] = to_json(relative_gaps(rep.aggregate, m));
  return {{"seeds", rep.seeds}, {"runs", runs}, {"aggregate", agg}, {"relative_gaps", gaps}};
}

/// Model | Prediction | Ground Truth | 8 metric columns as "mean ± std",
/// grouped by ground truth (All, Male, Female).
inline std::string bias_markdown(const BiasReport& rep) {
  std::vector<std::string> header{"Model", "Prediction", "Ground Truth"};
  for (const auto& h : level_metric_header()) header.push_back(h);
  MarkdownTable t(header);
  auto pm = [](double mean, double sd) { return fixed(mean) + " ± " + fixed(sd); };
  for (Channel gt : {Channel::kAll, Channel::kMale, Channel::kFemale}) {
    for (const auto& r : rep.aggregate) {
      if (r.ground_truth != gt) continue;
      std::vector<std::string> row{r.model, std::string(branch_name(r.prediction)),
                                   std::string(to_string(gt))};
      for (const auto* s : {&r.utterance_level, &r.system_level}) {
        row.push_back(pm(s->mean.lcc, s->std.lcc));
        row.push_back(pm(s->mean.srcc, s->std.srcc));
        row.push_back(pm(s->mean.mse, s->std.mse));
        row.push_back(pm(s->mean.ktau, s->std.ktau));
      }
      t.add_row(row);
    }
  }
  std::string out = t.str() + "\n";
  for (const auto& m : detail::models_of(rep.aggregate)) {
    const auto g = relative_gaps(rep.aggregate, m);
    out += m + " relative MSE gap (female vs male GT): utterance " +
           fixed(g.utterance_mse_pct, 1) + "%, system " + fixed(g.system_mse_pct, 1) + "%\n";
  }
  return out;
}

inline std::string bias_csv(const BiasReport& rep) {
  std::ostringstream out;
  out << "model,prediction,ground_truth,level,statistic,lcc,srcc,mse,ktau\n";
  for (const auto& r : rep.aggregate) {
    for (auto [level, s] : {std::pair{"utterance", &r.utterance_level},
                            std::pair{"system", &r.system_level}}) {
      for (auto [stat, m] : {std::pair{"mean", &s->mean}, std::pair{"std", &s->std}}) {
        out << r.model << ',' << branch_name(r.prediction) << ',' << to_string(r.ground_truth)
            << ',' << level << ',' << stat << ',' << format_double(m->lcc) << ','
            << format_double(m->srcc) << ',' << format_double(m->mse) << ','
            << format_double(m->ktau) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace genmos
