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

// Minibatch SGD with early stopping on dev system-level SRCC, prediction
// export, the bias-inheritance report, and multi-seed aggregation.

#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "genmos/aggregate.hpp"
#include "genmos/common.hpp"
#include "genmos/corpus.hpp"
#include "genmos/metrics.hpp"
#include "genmos/model.hpp"
#include "genmos/stats.hpp"

namespace genmos {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t max_steps = 100000;
  std::size_t batch_size = 16;
  std::size_t eval_every = 500;
  std::size_t patience = 20;
  std::uint64_t seed = 1337;
  bool enable_gender_branch = true;
  bool clip_predictions = false;
  ModelDims dims;
};

inline void check(const TrainConfig& c) {
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) throw Error("lr must be positive");
  if (c.max_steps == 0) throw Error("max_steps must be positive");
  if (c.batch_size == 0) throw Error("batch_size must be positive");
  if (c.eval_every == 0 || c.eval_every > c.max_steps) {
    throw Error("eval_every must be in [1, max_steps]");
  }
  if (c.patience == 0) throw Error("patience must be at least 1");
}

struct EvalRecord {
  std::size_t step = 0;
  double train_loss = 0.0;
  /// Avg branch against dev overall MOS; absent when degenerate (e.g.
  /// constant predictions).
  std::optional<MetricSet> dev_utterance_metrics;
  std::optional<double> dev_system_srcc;
  bool best_so_far = false;
};

enum class StoppingReason { kPatienceExhausted, kMaxSteps };

inline std::string_view to_string(StoppingReason r) {
  return r == StoppingReason::kPatienceExhausted ? "patience_exhausted" : "max_steps";
}

struct TrainHistory {
  std::vector<EvalRecord> evals;
  StoppingReason stopping_reason = StoppingReason::kMaxSteps;
  std::size_t best_index = 0;

  const EvalRecord& best() const { return evals.at(best_index); }
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

namespace detail {

inline void require_coverage(const std::vector<UtteranceScores>& scores,
                             const FeatureTable& features, const char* what) {
  std::vector<std::string> missing;
  for (const auto& s : scores) {
    if (!features.contains(s.utterance_id)) missing.push_back(s.utterance_id);
  }
  if (missing.empty()) return;
  std::string msg = std::string(what) + ": no features for " +
                    std::to_string(missing.size()) + " utterance(s):";
  for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
  if (missing.size() > 20) msg += " ...";
  throw Error(msg);
}

inline void require_targets(const std::vector<UtteranceScores>& scores, const char* what) {
  for (const auto& s : scores) {
    if (!s.mos_all) throw Error(std::string(what) + ": utterance " + s.utterance_id + " has no MOS");
  }
}

/// Builds a batch from the given rows of `scores`.
inline Batch make_batch(const std::vector<UtteranceScores>& scores, const FeatureTable& features,
                        std::span<const std::size_t> rows) {
  Batch b;
  b.n = rows.size();
  b.d = features.dim();
  b.features.reserve(b.n * b.d);
  for (std::size_t r : rows) {
    const auto& s = scores[r];
    const auto& f = features.at(s.utterance_id);
    b.features.insert(b.features.end(), f.begin(), f.end());
    b.targets_all.push_back(*s.mos_all);
    b.targets_male.push_back(s.mos_male.value_or(0.0));
    b.targets_female.push_back(s.mos_female.value_or(0.0));
    b.mask_male.push_back(s.mos_male ? 1 : 0);
    b.mask_female.push_back(s.mos_female ? 1 : 0);
  }
  return b;
}

inline void apply_sgd(ModelParams& p, const Gradients& g, double lr) {
  auto dst = p.tensors();
  auto src = g.tensors();
  for (std::size_t t = 0; t < ModelParams::kNumTensors; ++t) {
    auto& w = *dst[t];
    const auto& d = *src[t];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * d[i];
  }
}

}  // namespace detail

/// Per-utterance avg-branch predictions of the dev set and the resulting
/// dev metrics. Degenerate cases (zero-variance vectors) yield nullopt.
inline std::pair<std::optional<MetricSet>, std::optional<double>> dev_selection_metrics(
    const ModelParams& p, const std::vector<UtteranceScores>& dev, const FeatureTable& features) {
  std::map<std::string, double> preds;
  for (const auto& s : dev) {
    preds[s.utterance_id] = forward(p, std::span<const double>(features.at(s.utterance_id))).avg;
  }
  try {
    const EvalReport r = evaluate_predictions(preds, dev, Channel::kAll);
    return {r.utterance_level, r.system_level.srcc};
  } catch (const Error&) {
    return {std::nullopt, std::nullopt};
  }
}

/// Trains from a fresh init_params(config.dims, config.seed). Returns the
/// snapshot with the highest dev system-level SRCC (earliest on ties).
inline TrainResult train(const TrainConfig& config, const std::vector<UtteranceScores>& train_scores,
                         const std::vector<UtteranceScores>& dev_scores,
                         const FeatureTable& features) {
  check(config);
  if (config.dims.d != features.dim()) {
    throw Error("model input dimension " + std::to_string(config.dims.d) +
                " does not match feature dimension " + std::to_string(features.dim()));
  }
  if (train_scores.empty()) throw Error("training set is empty");
  if (dev_scores.empty()) throw Error("dev set is empty");
  detail::require_coverage(train_scores, features, "train");
  detail::require_coverage(dev_scores, features, "dev");
  detail::require_targets(train_scores, "train");
  detail::require_targets(dev_scores, "dev");

  ModelParams params = init_params(config.dims, config.seed);
  ModelParams best = params;
  TrainHistory history;
  std::optional<double> best_srcc;
  bool have_best = false;
  std::size_t since_best = 0;

  Rng shuffle_rng(derive_seed(config.seed, 20));
  std::vector<std::size_t> order(train_scores.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle_rng.shuffle(order);
  std::size_t cursor = 0;
  std::vector<std::size_t> rows(config.batch_size);

  CompensatedSum loss_sum;
  std::size_t loss_count = 0;
  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    for (std::size_t k = 0; k < config.batch_size; ++k) {
      if (cursor == order.size()) {
        shuffle_rng.shuffle(order);
        cursor = 0;
      }
      rows[k] = order[cursor++];
    }
    const Batch batch = detail::make_batch(train_scores, features, rows);
    const BackwardResult br = backward(params, batch, config.enable_gender_branch);
    loss_sum.add(br.loss);
    ++loss_count;
    detail::apply_sgd(params, br.grads, config.lr);

    if (step % config.eval_every != 0) continue;
    EvalRecord rec;
    rec.step = step;
    rec.train_loss = loss_sum.value() / static_cast<double>(loss_count);
    loss_sum = CompensatedSum{};
    loss_count = 0;
    auto [metrics, srcc] = dev_selection_metrics(params, dev_scores, features);
    rec.dev_utterance_metrics = metrics;
    rec.dev_system_srcc = srcc;
    const bool improved =
        !have_best || (srcc && (!best_srcc || *srcc > *best_srcc));
    if (improved) {
      have_best = true;
      best_srcc = srcc;
      best = params;
      rec.best_so_far = true;
      history.best_index = history.evals.size();
      since_best = 0;
    } else {
      ++since_best;
    }
    history.evals.push_back(rec);
    if (since_best >= config.patience) {
      history.stopping_reason = StoppingReason::kPatienceExhausted;
      break;
    }
  }
  return {std::move(best), std::move(history)};
}

using Predictions = std::map<std::string, BranchOutputs<double>>;

inline Predictions predict_all(const ModelParams& p, const FeatureTable& features, bool clip) {
  if (features.dim() != p.dims.d) {
    throw Error("feature dimension " + std::to_string(features.dim()) +
                " does not match model input " + std::to_string(p.dims.d));
  }
  Predictions out;
  for (const auto& id : features.ids()) {
    auto y = forward(p, std::span<const double>(features.at(id)));
    if (clip) {
      y.avg = std::clamp(y.avg, 1.0, 5.0);
      y.male = std::clamp(y.male, 1.0, 5.0);
      y.female = std::clamp(y.female, 1.0, 5.0);
    }
    out[id] = y;
  }
  return out;
}

/// Branch selector: Channel::kAll names the avg (mean head) output.
inline std::map<std::string, double> branch_predictions(const Predictions& preds, Channel branch) {
  std::map<std::string, double> out;
  for (const auto& [id, y] : preds) {
    out[id] = branch == Channel::kAll ? y.avg : branch == Channel::kMale ? y.male : y.female;
  }
  return out;
}

inline std::string_view branch_name(Channel branch) {
  return branch == Channel::kAll ? "Avg" : to_string(branch);
}

inline void write_predictions(std::ostream& out, const Predictions& preds) {
  out << "utterance_id,y_avg,y_male,y_female\n";
  for (const auto& [id, y] : preds) {
    out << id << ',' << format_double(y.avg) << ',' << format_double(y.male) << ','
        << format_double(y.female) << '\n';
  }
}

inline Predictions parse_predictions(std::istream& in) {
  Predictions out;
  bool header = true;
  detail::for_each_line(in, [&](std::size_t line_no, std::string_view line) {
    if (header) {
      header = false;
      if (detail::trim(line) != "utterance_id,y_avg,y_male,y_female") {
        throw detail::line_error(line_no, "unexpected predictions header");
      }
      return;
    }
    const auto f = split_csv(line);
    if (f.size() != 4) throw detail::line_error(line_no, "expected 4 fields");
    BranchOutputs<double> y;
    const auto a = parse_double(f[1]);
    const auto m = parse_double(f[2]);
    const auto fe = parse_double(f[3]);
    if (!a || !m || !fe) throw detail::line_error(line_no, "malformed prediction value");
    y.avg = *a;
    y.male = *m;
    y.female = *fe;
    out[std::string(detail::trim(f[0]))] = y;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Bias reports

struct PredictionRow {
  std::string model;
  Channel prediction = Channel::kAll;  // branch; kAll is the avg branch
  EvalReport report;  // report.ground_truth_set is the GT listener set
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<PredictionRow> rows;
};

struct MetricSummary {
  MetricSet mean;
  MetricSet std;
};

struct AggregateRow {
  std::string model;
  Channel prediction = Channel::kAll;
  Channel ground_truth = Channel::kAll;
  MetricSummary utterance_level;
  MetricSummary system_level;
};

struct RelativeGaps {
  double utterance_mse_pct = 0.0;
  double system_mse_pct = 0.0;
};

struct BiasReport {
  std::vector<std::uint64_t> seeds;
  std::vector<SeedResult> runs;
  std::vector<AggregateRow> aggregate;
};

/// Sample mean and (n - 1) standard deviation; std is 0 for a single value.
inline std::pair<double, double> seed_mean_std(std::span<const double> v) {
  const MeanStd ms = mean_std(v);
  return {ms.mean, ms.std};
}

/// Recomputes the across-seed summary rows from the per-seed rows.
inline std::vector<AggregateRow> aggregate_runs(const std::vector<SeedResult>& runs) {
  std::vector<AggregateRow> out;
  if (runs.empty()) return out;
  for (std::size_t r = 0; r < runs.front().rows.size(); ++r) {
    const auto& proto = runs.front().rows[r];
    AggregateRow row;
    row.model = proto.model;
    row.prediction = proto.prediction;
    row.ground_truth = proto.report.ground_truth_set;
    auto summarize = [&](auto level, auto field) {
      std::vector<double> v;
      for (const auto& run : runs) {
        const auto& pr = run.rows.at(r);
        if (pr.model != row.model || pr.prediction != row.prediction ||
            pr.report.ground_truth_set != row.ground_truth) {
          throw Error("seed runs have mismatched report rows");
        }
        v.push_back(pr.report.*level.*field);
      }
      return seed_mean_std(v);
    };
    for (auto [level, summary] :
         {std::pair{&EvalReport::utterance_level, &row.utterance_level},
          std::pair{&EvalReport::system_level, &row.system_level}}) {
      for (auto field : {&MetricSet::lcc, &MetricSet::srcc, &MetricSet::mse, &MetricSet::ktau}) {
        auto [m, s] = summarize(level, field);
        summary->mean.*field = m;
        summary->std.*field = s;
      }
    }
    out.push_back(row);
  }
  return out;
}

/// Female-vs-male relative MSE gaps of one model's avg branch, derived from
/// the report rows (never stored).
inline RelativeGaps relative_gaps(const SeedResult& run, const std::string& model) {
  const EvalReport* male = nullptr;
  const EvalReport* female = nullptr;
  for (const auto& r : run.rows) {
    if (r.model != model || r.prediction != Channel::kAll) continue;
    if (r.report.ground_truth_set == Channel::kMale) male = &r.report;
    if (r.report.ground_truth_set == Channel::kFemale) female = &r.report;
  }
  if (!male || !female) throw Error("report lacks male/female rows for model " + model);
  return {relative_gap(female->utterance_level.mse, male->utterance_level.mse),
          relative_gap(female->system_level.mse, male->system_level.mse)};
}

/// Same, from the across-seed mean MSEs.
inline RelativeGaps relative_gaps(const std::vector<AggregateRow>& rows, const std::string& model) {
  const AggregateRow* male = nullptr;
  const AggregateRow* female = nullptr;
  for (const auto& r : rows) {
    if (r.model != model || r.prediction != Channel::kAll) continue;
    if (r.ground_truth == Channel::kMale) male = &r;
    if (r.ground_truth == Channel::kFemale) female = &r;
  }
  if (!male || !female) throw Error("report lacks male/female rows for model " + model);
  return {relative_gap(female->utterance_level.mean.mse, male->utterance_level.mean.mse),
          relative_gap(female->system_level.mean.mse, male->system_level.mean.mse)};
}

/// Evaluates one avg-branch prediction vector against All, Male and Female
/// ground truth.
inline BiasReport bias_inheritance(const std::map<std::string, double>& preds_avg,
                                   const std::vector<UtteranceScores>& test_scores,
                                   const std::string& model = "Baseline",
                                   std::uint64_t seed = 0) {
  SeedResult run;
  run.seed = seed;
  for (Channel gt : {Channel::kAll, Channel::kMale, Channel::kFemale}) {
    run.rows.push_back({model, Channel::kAll, evaluate_predictions(preds_avg, test_scores, gt)});
  }
  BiasReport rep;
  rep.seeds = {seed};
  rep.runs = {run};
  rep.aggregate = aggregate_runs(rep.runs);
  return rep;
}

/// Report rows for one trained model on the test split: the avg branch
/// against all three GT sets, plus each gender branch against its own GT
/// when the gender branch is enabled.
inline SeedResult evaluate_model(const std::string& model, const Predictions& preds,
                                 const std::vector<UtteranceScores>& test, bool gender_branch,
                                 std::uint64_t seed) {
  SeedResult run;
  run.seed = seed;
  const auto avg = branch_predictions(preds, Channel::kAll);
  run.rows.push_back({model, Channel::kAll, evaluate_predictions(avg, test, Channel::kAll)});
  run.rows.push_back({model, Channel::kAll, evaluate_predictions(avg, test, Channel::kMale)});
  if (gender_branch) {
    run.rows.push_back({model, Channel::kMale,
                        evaluate_predictions(branch_predictions(preds, Channel::kMale), test,
                                             Channel::kMale)});
  }
  run.rows.push_back({model, Channel::kAll, evaluate_predictions(avg, test, Channel::kFemale)});
  if (gender_branch) {
    run.rows.push_back({model, Channel::kFemale,
                        evaluate_predictions(branch_predictions(preds, Channel::kFemale), test,
                                             Channel::kFemale)});
  }
  return run;
}

/// Aggregated utterance scores per split plus features.
struct TrainingCorpus {
  std::vector<UtteranceScores> train;
  std::vector<UtteranceScores> dev;
  std::vector<UtteranceScores> test;
  FeatureTable features;
};

inline TrainingCorpus make_corpus(const RatingTable& ratings, FeatureTable features) {
  TrainingCorpus c;
  c.train = aggregate_table(ratings, Split::kTrain);
  c.dev = aggregate_table(ratings, Split::kDev);
  c.test = aggregate_table(ratings, Split::kTest);
  c.features = std::move(features);
  return c;
}

inline const std::vector<std::uint64_t>& default_seeds() {
  static const std::vector<std::uint64_t> kSeeds = {1337, 2337, 3337};
  return kSeeds;
}

/// Trains one model per seed (concurrently) and evaluates each on the test
/// split. A failing seed aborts the whole run with that seed's error.
inline BiasReport multi_seed(const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
                             const TrainingCorpus& corpus, const std::string& model) {
  if (seeds.empty()) throw Error("multi_seed needs at least one seed");
  std::vector<std::future<SeedResult>> jobs;
  for (std::uint64_t seed : seeds) {
    jobs.push_back(std::async(std::launch::async, [&, seed] {
      TrainConfig c = config;
      c.seed = seed;
      const TrainResult tr = train(c, corpus.train, corpus.dev, corpus.features);
      const Predictions preds = predict_all(tr.params, corpus.features, c.clip_predictions);
      return evaluate_model(model, preds, corpus.test, c.enable_gender_branch, seed);
    }));
  }
  BiasReport rep;
  rep.seeds = seeds;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      rep.runs.push_back(jobs[i].get());
    } catch (const Error& e) {
      for (std::size_t j = i + 1; j < jobs.size(); ++j) jobs[j].wait();
      throw Error("seed " + std::to_string(seeds[i]) + ": " + e.what());
    }
  }
  rep.aggregate = aggregate_runs(rep.runs);
  return rep;
}

/// Concatenates the rows of reports computed over the same seeds.
inline BiasReport merge_reports(const BiasReport& a, const BiasReport& b) {
  if (a.seeds != b.seeds) throw Error("cannot merge reports over different seeds");
  BiasReport out = a;
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    out.runs[i].rows.insert(out.runs[i].rows.end(), b.runs[i].rows.begin(), b.runs[i].rows.end());
  }
  out.aggregate = aggregate_runs(out.runs);
  return out;
}

}  // namespace genmos
