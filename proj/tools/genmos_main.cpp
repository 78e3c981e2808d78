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

// genmos: gender-specific MOS analysis and training from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "genmos/genmos.hpp"

namespace fs = std::filesystem;

namespace {

using genmos::Error;
using genmos::Json;

struct Globals {
  std::string format = "json";
  bool quiet = false;
  std::string output;
};

Globals g_opts;

void progress(const std::string& msg) {
  if (!g_opts.quiet) std::cerr << "genmos: " << msg << '\n';
}

void warn(const std::string& msg) { std::cerr << "genmos: warning: " << msg << '\n'; }

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write " + path);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  auto out = open_out(path, true);
  out << content;
  out.flush();
  if (!out) throw Error("failed writing " + path);
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

/// Writes the primary output in the selected format. Formats with no
/// renderer are rejected.
void emit(const Json& j, const std::function<std::string()>& markdown,
          const std::function<std::string()>& csv) {
  std::string text;
  if (g_opts.format == "json") {
    text = json_text(j);
  } else if (g_opts.format == "markdown") {
    if (!markdown) throw Error("this subcommand does not support --format markdown");
    text = markdown();
  } else {
    if (!csv) throw Error("this subcommand does not support --format csv");
    text = csv();
  }
  if (g_opts.output.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(g_opts.output, text);
  }
}

genmos::RatingTable load_ratings(const std::string& path) {
  auto in = open_in(path);
  try {
    return genmos::parse_ratings(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

genmos::FeatureTable load_features(const std::string& path) {
  auto in = open_in(path);
  try {
    return genmos::parse_features(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

genmos::Split split_of(const std::string& s) {
  const auto sp = genmos::parse_split(s);
  if (!sp) throw Error("unknown split '" + s + "'");
  return *sp;
}

void require_records(const genmos::RatingTable& t, genmos::Split s) {
  if (t.indices_for_split(s).empty()) {
    throw Error("split contains no records: " + std::string(genmos::to_string(s)));
  }
}

genmos::Channel channel_of(const std::string& s) {
  if (s == "all" || s == "avg") return genmos::Channel::kAll;
  if (s == "male") return genmos::Channel::kMale;
  if (s == "female") return genmos::Channel::kFemale;
  throw Error("unknown channel '" + s + "'");
}

std::string join_csv_blocks(const std::string& a, const std::string& b) { return a + "\n" + b; }

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  genmos::SynthConfig config;
  std::uint64_t seed = 1;
  std::string out_dir;
};

void cmd_synth(const SynthArgs& a) {
  genmos::check(a.config);
  const auto corpus = genmos::generate_synthetic(a.config, a.seed);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Error("cannot create " + a.out_dir + ": " + ec.message());
  const fs::path dir(a.out_dir);
  std::ostringstream r, f, t;
  genmos::write_ratings(r, corpus.ratings);
  genmos::write_features(f, corpus.features);
  genmos::write_truth(t, corpus.truth);
  write_file((dir / "ratings.csv").string(), r.str());
  write_file((dir / "features.csv").string(), f.str());
  write_file((dir / "truth.csv").string(), t.str());
  const auto report = genmos::validate(corpus.ratings);
  progress("wrote " + std::to_string(report.n_records) + " ratings for " +
           std::to_string(report.n_utterances) + " utterances to " + a.out_dir);
  const auto& c = a.config;
  Json j = {{"seed", a.seed},
            {"config",
             {{"n_systems", c.n_systems},
              {"utterances_per_system", c.utterances_per_system},
              {"raters_male_per_utt", c.raters_male_per_utt},
              {"raters_female_per_utt", c.raters_female_per_utt},
              {"gap_low_quality", c.gap_low_quality},
              {"gap_high_quality", c.gap_high_quality},
              {"rater_noise_std", c.rater_noise_std},
              {"feature_dim", c.feature_dim},
              {"feature_noise_std", c.feature_noise_std},
              {"dev_fraction", c.dev_fraction},
              {"test_fraction", c.test_fraction}}},
            {"files", {"ratings.csv", "features.csv", "truth.csv"}},
            {"validation", genmos::to_json(report)}};
  emit(j, [&] { return genmos::to_markdown(report); }, [&] { return genmos::to_csv(report); });
}

// ---------------------------------------------------------------------------
// adapt-sheet

struct AdaptArgs {
  std::string input;
  std::string split = "train";
  std::string speaker_genders;
  std::string out;
};

void cmd_adapt(const AdaptArgs& a) {
  genmos::SheetAdapterOptions opt;
  opt.split = split_of(a.split);
  if (!a.speaker_genders.empty()) {
    auto in = open_in(a.speaker_genders);
    opt.speaker_genders = genmos::parse_speaker_genders(in);
  }
  auto in = open_in(a.input);
  genmos::RatingTable table;
  try {
    table = genmos::adapt_sheet(in, opt);
  } catch (const Error& e) {
    throw Error(a.input + ": " + e.what());
  }
  std::ostringstream csv;
  genmos::write_ratings(csv, table);
  write_file(a.out, csv.str());
  const auto report = genmos::validate(table);
  if (!g_opts.quiet && !report.issues.empty()) {
    warn(std::to_string(report.issues.size()) + " utterance(s) lack raters of one gender");
  }
  emit(genmos::to_json(report), [&] { return genmos::to_markdown(report); },
       [&] { return genmos::to_csv(report); });
}

// ---------------------------------------------------------------------------
// validate / aggregate

struct RatingsArgs {
  std::string ratings;
  std::string split;
};

void cmd_validate(const RatingsArgs& a) {
  const auto table = load_ratings(a.ratings);
  std::optional<genmos::Split> split;
  if (!a.split.empty()) split = split_of(a.split);
  const auto report = genmos::validate(table, split);
  if (!g_opts.quiet && !report.issues.empty()) {
    warn(std::to_string(report.issues.size()) + " utterance(s) lack raters of one gender");
  }
  emit(genmos::to_json(report), [&] { return genmos::to_markdown(report); },
       [&] { return genmos::to_csv(report); });
}

Json utterance_scores_json(const std::vector<genmos::UtteranceScores>& scores) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json out = Json::array();
  for (const auto& s : scores) {
    out.push_back({{"utterance_id", s.utterance_id},
                   {"system_id", s.system_id},
                   {"speaker_gender", std::string(genmos::to_string(s.speaker_gender))},
                   {"mos_all", opt(s.mos_all)},
                   {"mos_male", opt(s.mos_male)},
                   {"mos_female", opt(s.mos_female)},
                   {"n_all", s.n_all},
                   {"n_male", s.n_male},
                   {"n_female", s.n_female}});
  }
  return out;
}

void cmd_aggregate(const RatingsArgs& a) {
  const auto table = load_ratings(a.ratings);
  const auto split = split_of(a.split.empty() ? "train" : a.split);
  require_records(table, split);
  const auto scores = genmos::aggregate_table(table, split);
  emit(
      {{"split", std::string(genmos::to_string(split))}, {"utterances", utterance_scores_json(scores)}},
      [&] {
        genmos::MarkdownTable t({"Utterance", "System", "Speaker", "MOS", "MOS_M", "MOS_F", "n",
                                 "n_M", "n_F"});
        auto cell = [](const std::optional<double>& v) {
          return v ? genmos::fixed(*v) : std::string("-");
        };
        for (const auto& s : scores) {
          t.add_row({s.utterance_id, s.system_id, std::string(genmos::to_string(s.speaker_gender)),
                     cell(s.mos_all), cell(s.mos_male), cell(s.mos_female), std::to_string(s.n_all),
                     std::to_string(s.n_male), std::to_string(s.n_female)});
        }
        return t.str();
      },
      [&] {
        std::ostringstream out;
        genmos::write_utterance_scores(out, scores);
        return out.str();
      });
}

// ---------------------------------------------------------------------------
// analyze / welch / tiers

void cmd_analyze(const RatingsArgs& a, bool welch_only) {
  const auto table = load_ratings(a.ratings);
  const auto split = split_of(a.split.empty() ? "train" : a.split);
  require_records(table, split);
  const auto tests = genmos::listener_gender_tests(table, split);
  if (welch_only) {
    emit({{"split", std::string(genmos::to_string(split))}, {"welch", genmos::to_json(tests)}},
         [&] { return genmos::welch_markdown(tests); }, [&] { return genmos::welch_csv(tests); });
    return;
  }
  const auto conds = genmos::condition_stats(table, split);
  emit(
      {{"split", std::string(genmos::to_string(split))},
       {"conditions", genmos::to_json(conds)},
       {"welch", genmos::to_json(tests)}},
      [&] { return genmos::condition_markdown(conds) + "\n" + genmos::welch_markdown(tests); },
      [&] { return join_csv_blocks(genmos::condition_csv(conds), genmos::welch_csv(tests)); });
}

struct TiersArgs {
  RatingsArgs ratings;
  bool pooled = false;
  std::string plot_csv;
};

void cmd_tiers(const TiersArgs& a) {
  const auto table = load_ratings(a.ratings.ratings);
  const auto split = split_of(a.ratings.split.empty() ? "train" : a.ratings.split);
  require_records(table, split);
  const auto m = a.pooled ? genmos::tier_gap_matrix_pooled(table, split)
                          : genmos::tier_gap_matrix(genmos::aggregate_table(table, split));
  bool any = false;
  for (const auto& row : m.cells) {
    for (const auto& c : row) any = any || c.gap.has_value();
  }
  if (!any) warn("every tier cell is absent (no utterance has both male and female raters)");
  if (!a.plot_csv.empty()) write_file(a.plot_csv, genmos::tiers_csv(m));
  Json j = genmos::to_json(m, a.pooled ? "pooled" : "per_utterance");
  j["split"] = std::string(genmos::to_string(split));
  emit(j, [&] { return genmos::tiers_markdown(m); }, [&] { return genmos::tiers_csv(m); });
}

// ---------------------------------------------------------------------------
// train / predict

struct TrainArgs {
  std::string ratings;
  std::string features;
  genmos::TrainConfig config;
  std::string gender_branch = "on";
  std::string out;
  std::string history;
};

genmos::TrainConfig resolve_config(genmos::TrainConfig c, const std::string& gender_branch,
                                   const genmos::FeatureTable& features) {
  c.enable_gender_branch = gender_branch == "on";
  c.dims.d = features.dim();
  return c;
}

void cmd_train(const TrainArgs& a) {
  const auto table = load_ratings(a.ratings);
  auto features = load_features(a.features);
  const auto config = resolve_config(a.config, a.gender_branch, features);
  const auto corpus = genmos::make_corpus(table, std::move(features));
  progress("training on " + std::to_string(corpus.train.size()) + " utterances (dev " +
           std::to_string(corpus.dev.size()) + ")");
  const auto result = genmos::train(config, corpus.train, corpus.dev, corpus.features);
  {
    auto out = open_out(a.out, true);
    genmos::write_model(out, result.params);
    out.flush();
    if (!out) throw Error("failed writing " + a.out);
  }
  const auto& h = result.history;
  progress("stopped (" + std::string(genmos::to_string(h.stopping_reason)) + ") after " +
           std::to_string(h.evals.back().step) + " steps; best step " +
           std::to_string(h.best().step));
  const Json j = {{"config", genmos::to_json(config)},
                  {"n_train", corpus.train.size()},
                  {"n_dev", corpus.dev.size()},
                  {"history", genmos::to_json(h)}};
  if (!a.history.empty()) write_file(a.history, json_text(j));
  auto fmt = [](const std::optional<double>& v) {
    return v ? genmos::fixed(*v, 4) : std::string("-");
  };
  emit(
      j,
      [&] {
        genmos::MarkdownTable t({"Step", "Train loss", "Dev LCC", "Dev sys SRCC", "Best"});
        for (const auto& e : h.evals) {
          t.add_row({std::to_string(e.step), genmos::fixed(e.train_loss, 4),
                     fmt(e.dev_utterance_metrics ? std::optional(e.dev_utterance_metrics->lcc)
                                                 : std::nullopt),
                     fmt(e.dev_system_srcc), e.best_so_far ? "*" : ""});
        }
        return t.str();
      },
      [&] {
        std::ostringstream out;
        out << "step,train_loss,dev_lcc,dev_srcc,dev_mse,dev_ktau,dev_system_srcc,best_so_far\n";
        for (const auto& e : h.evals) {
          auto f = [](const std::optional<double>& v) {
            return v ? genmos::format_double(*v) : std::string();
          };
          const auto& m = e.dev_utterance_metrics;
          out << e.step << ',' << genmos::format_double(e.train_loss) << ','
              << f(m ? std::optional(m->lcc) : std::nullopt) << ','
              << f(m ? std::optional(m->srcc) : std::nullopt) << ','
              << f(m ? std::optional(m->mse) : std::nullopt) << ','
              << f(m ? std::optional(m->ktau) : std::nullopt) << ',' << f(e.dev_system_srcc)
              << ',' << (e.best_so_far ? 1 : 0) << '\n';
        }
        return out.str();
      });
}

struct PredictArgs {
  std::string model;
  std::string features;
  bool clip = false;
  std::string out;
};

void cmd_predict(const PredictArgs& a) {
  auto min = open_in(a.model);
  const auto params = genmos::read_model(min);
  const auto features = load_features(a.features);
  const auto preds = genmos::predict_all(params, features, a.clip);
  std::ostringstream csv;
  genmos::write_predictions(csv, preds);
  write_file(a.out, csv.str());
  emit({{"n_predictions", preds.size()},
        {"clip", a.clip},
        {"dims", genmos::to_json(params.dims)},
        {"seed", params.seed}},
       nullptr, nullptr);
}

genmos::Predictions load_predictions(const std::string& path) {
  auto in = open_in(path);
  try {
    return genmos::parse_predictions(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// eval / bias-report

struct EvalArgs {
  std::string predictions;
  std::string ratings;
  std::string split = "test";
  std::string branch = "avg";
  std::string gt = "every";
};

void cmd_eval(const EvalArgs& a) {
  const auto preds = load_predictions(a.predictions);
  const auto table = load_ratings(a.ratings);
  const auto split = split_of(a.split);
  require_records(table, split);
  const auto scores = genmos::aggregate_table(table, split);
  const auto branch = genmos::branch_predictions(preds, channel_of(a.branch));
  std::vector<genmos::Channel> gts;
  if (a.gt == "every") {
    gts = {genmos::Channel::kAll, genmos::Channel::kMale, genmos::Channel::kFemale};
  } else {
    gts = {channel_of(a.gt)};
  }
  std::vector<genmos::EvalReport> reports;
  for (auto gt : gts) reports.push_back(genmos::evaluate_predictions(branch, scores, gt));
  Json rs = Json::array();
  for (const auto& r : reports) rs.push_back(genmos::to_json(r));
  emit({{"split", std::string(genmos::to_string(split))},
        {"prediction", std::string(genmos::branch_name(channel_of(a.branch)))},
        {"reports", rs}},
       [&] { return genmos::eval_markdown(reports); }, [&] { return genmos::eval_csv(reports); });
}

struct BiasArgs {
  std::string ratings;
  std::string predictions;
  std::string features;
  std::string split = "test";
  std::string model = "Baseline";
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> models{"baseline", "gender-aware"};
  genmos::TrainConfig config;
  std::string markdown_out;
};

void cmd_bias(const BiasArgs& a) {
  const auto table = load_ratings(a.ratings);
  genmos::BiasReport rep;
  if (!a.predictions.empty()) {
    if (!a.features.empty()) throw Error("give either --predictions or --features, not both");
    const auto split = split_of(a.split);
    require_records(table, split);
    const auto preds = load_predictions(a.predictions);
    rep = genmos::bias_inheritance(genmos::branch_predictions(preds, genmos::Channel::kAll),
                                   genmos::aggregate_table(table, split), a.model);
  } else {
    if (a.features.empty()) throw Error("bias-report needs --predictions or --features");
    if (a.split != "test") throw Error("training mode always reports on the test split");
    auto features = load_features(a.features);
    const auto seeds = a.seeds.empty() ? genmos::default_seeds() : a.seeds;
    const auto corpus = genmos::make_corpus(table, std::move(features));
    require_records(table, genmos::Split::kTest);
    bool first = true;
    for (const auto& m : a.models) {
      genmos::TrainConfig c = a.config;
      c.dims.d = corpus.features.dim();
      std::string name;
      if (m == "baseline") {
        c.enable_gender_branch = false;
        name = "Baseline";
      } else if (m == "gender-aware") {
        c.enable_gender_branch = true;
        name = "Gender-aware";
      } else {
        throw Error("unknown model '" + m + "' (expected baseline or gender-aware)");
      }
      progress("training " + name + " over " + std::to_string(seeds.size()) + " seed(s)");
      auto r = genmos::multi_seed(c, seeds, corpus, name);
      rep = first ? std::move(r) : genmos::merge_reports(rep, r);
      first = false;
    }
  }
  if (!a.markdown_out.empty()) write_file(a.markdown_out, genmos::bias_markdown(rep));
  emit(genmos::to_json(rep), [&] { return genmos::bias_markdown(rep); },
       [&] { return genmos::bias_csv(rep); });
}

void add_train_flags(CLI::App* sub, genmos::TrainConfig& c) {
  sub->add_option("--lr", c.lr, "SGD learning rate")->capture_default_str();
  sub->add_option("--max-steps", c.max_steps, "Maximum SGD steps")->capture_default_str();
  sub->add_option("--batch-size", c.batch_size, "Minibatch size")->capture_default_str();
  sub->add_option("--eval-every", c.eval_every, "Steps between dev evaluations")
      ->capture_default_str();
  sub->add_option("--patience", c.patience, "Non-improving evaluations before stopping")
      ->capture_default_str();
  sub->add_option("--hidden", c.dims.h, "Encoder hidden width")->capture_default_str();
  sub->add_option("--embed", c.dims.e, "Encoder output width")->capture_default_str();
  sub->add_option("--gender-dim", c.dims.g, "Gender embedding width")->capture_default_str();
  sub->add_option("--gender-hidden", c.dims.gender_hidden,
                  "Hidden units in the gender head (0 = linear)")
      ->capture_default_str();
  sub->add_flag("--clip", c.clip_predictions, "Clip predictions to [1, 5]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genmos: gender-specific MOS analysis, training and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--format", g_opts.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "markdown"}))
      ->capture_default_str();
  app.add_flag("--quiet", g_opts.quiet, "Suppress progress messages");
  app.add_option("-o,--output", g_opts.output, "Write the primary output here instead of stdout");

  std::function<void()> action;
  const std::vector<std::string> splits{"train", "dev", "test"};

  SynthArgs synth;
  {
    auto* s = app.add_subcommand("synth", "Generate a synthetic corpus");
    auto& c = synth.config;
    s->add_option("--out-dir", synth.out_dir, "Output directory")->required();
    s->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    s->add_option("--systems", c.n_systems)->capture_default_str();
    s->add_option("--utterances-per-system", c.utterances_per_system)->capture_default_str();
    s->add_option("--male-raters", c.raters_male_per_utt)->capture_default_str();
    s->add_option("--female-raters", c.raters_female_per_utt)->capture_default_str();
    s->add_option("--gap-low", c.gap_low_quality)->capture_default_str();
    s->add_option("--gap-high", c.gap_high_quality)->capture_default_str();
    s->add_option("--rater-noise", c.rater_noise_std)->capture_default_str();
    s->add_option("--feature-dim", c.feature_dim)->capture_default_str();
    s->add_option("--feature-noise", c.feature_noise_std)->capture_default_str();
    s->add_option("--dev-fraction", c.dev_fraction)->capture_default_str();
    s->add_option("--test-fraction", c.test_fraction)->capture_default_str();
    s->callback([&] { action = [&] { cmd_synth(synth); }; });
  }

  AdaptArgs adapt;
  {
    auto* s = app.add_subcommand("adapt-sheet", "Convert SHEET/BVCC metadata to canonical CSV");
    s->add_option("--input", adapt.input, "SHEET/BVCC rating file")->required();
    s->add_option("--out", adapt.out, "Canonical ratings CSV to write")->required();
    s->add_option("--split", adapt.split, "Split for rows without a split column")
        ->check(CLI::IsMember(splits))
        ->capture_default_str();
    s->add_option("--speaker-genders", adapt.speaker_genders,
                  "utterance_id,speaker_gender lookup");
    s->callback([&] { action = [&] { cmd_adapt(adapt); }; });
  }

  RatingsArgs validate_args, aggregate_args, analyze_args, welch_args;
  auto ratings_sub = [&](const char* name, const char* help, RatingsArgs& args, bool split_optional,
                         std::function<void()> fn) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--ratings", args.ratings, "Canonical ratings CSV")->required();
    auto* sp = s->add_option("--split", args.split,
                             split_optional ? "Restrict to one split" : "Split (default train)");
    sp->check(CLI::IsMember(splits));
    s->callback([&action, fn] { action = fn; });
    return s;
  };
  ratings_sub("validate", "Summarize and check a ratings file", validate_args, true,
              [&] { cmd_validate(validate_args); });
  ratings_sub("aggregate", "Per-utterance MOS, MOS_M and MOS_F", aggregate_args, false,
              [&] { cmd_aggregate(aggregate_args); });
  ratings_sub("analyze", "Condition statistics and listener-gender Welch tests", analyze_args,
              false, [&] { cmd_analyze(analyze_args, false); });
  ratings_sub("welch", "Listener-gender Welch tests", welch_args, false,
              [&] { cmd_analyze(welch_args, true); });

  TiersArgs tiers;
  {
    auto* s = ratings_sub("tiers", "Male-minus-female gap by quality tier", tiers.ratings, false,
                          [&] { cmd_tiers(tiers); });
    s->add_flag("--pooled", tiers.pooled, "Pool raw ratings instead of averaging utterance gaps");
    s->add_option("--plot-csv", tiers.plot_csv, "Also write the heatmap CSV here");
  }

  TrainArgs train;
  {
    auto* s = app.add_subcommand("train", "Train a model with early stopping");
    s->add_option("--ratings", train.ratings, "Canonical ratings CSV")->required();
    s->add_option("--features", train.features, "Features CSV")->required();
    s->add_option("--seed", train.config.seed, "Run seed")->capture_default_str();
    s->add_option("--gender-branch", train.gender_branch, "Train the gender head")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    s->add_option("--out", train.out, "Model file to write")->required();
    s->add_option("--history", train.history, "Also write the JSON history here");
    add_train_flags(s, train.config);
    s->callback([&] { action = [&] { cmd_train(train); }; });
  }

  PredictArgs predict;
  {
    auto* s = app.add_subcommand("predict", "Write per-utterance predictions of a model");
    s->add_option("--model", predict.model, "Model file")->required();
    s->add_option("--features", predict.features, "Features CSV")->required();
    s->add_option("--out", predict.out, "Predictions CSV to write")->required();
    s->add_flag("--clip", predict.clip, "Clip predictions to [1, 5]");
    s->callback([&] { action = [&] { cmd_predict(predict); }; });
  }

  EvalArgs eval;
  {
    auto* s = app.add_subcommand("eval", "Evaluate predictions against ground-truth sets");
    s->add_option("--predictions", eval.predictions, "Predictions CSV")->required();
    s->add_option("--ratings", eval.ratings, "Canonical ratings CSV")->required();
    s->add_option("--split", eval.split)->check(CLI::IsMember(splits))->capture_default_str();
    s->add_option("--branch", eval.branch, "Prediction branch")
        ->check(CLI::IsMember({"avg", "male", "female"}))
        ->capture_default_str();
    s->add_option("--gt", eval.gt, "Ground-truth set")
        ->check(CLI::IsMember({"all", "male", "female", "every"}))
        ->capture_default_str();
    s->callback([&] { action = [&] { cmd_eval(eval); }; });
  }

  BiasArgs bias;
  {
    auto* s = app.add_subcommand(
        "bias-report", "Avg-branch evaluation against All, Male and Female ground truth");
    s->add_option("--ratings", bias.ratings, "Canonical ratings CSV")->required();
    s->add_option("--predictions", bias.predictions, "Evaluate an existing predictions CSV");
    s->add_option("--features", bias.features, "Train models on these features instead");
    s->add_option("--split", bias.split)->check(CLI::IsMember(splits))->capture_default_str();
    s->add_option("--model", bias.model, "Model name for --predictions")->capture_default_str();
    s->add_option("--seeds", bias.seeds, "Seeds for training mode (default 1337,2337,3337)")
        ->delimiter(',');
    s->add_option("--models", bias.models, "Models to train")
        ->delimiter(',')
        ->check(CLI::IsMember({"baseline", "gender-aware"}))
        ->capture_default_str();
    s->add_option("--markdown", bias.markdown_out, "Also write the markdown table here");
    add_train_flags(s, bias.config);
    s->callback([&] { action = [&] { cmd_bias(bias); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    action();
  } catch (const std::exception& e) {
    std::cerr << "genmos: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
