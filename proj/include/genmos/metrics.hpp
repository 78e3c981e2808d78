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

// Agreement metrics between predictions and ground truth: Pearson (LCC),
// Spearman (SRCC), Kendall tau-b (KTAU), and MSE, at utterance and system
// level.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "genmos/aggregate.hpp"
#include "genmos/common.hpp"

namespace genmos {

namespace detail {

inline void require_same_length(std::span<const double> x, std::span<const double> y,
                                std::size_t min_len, const char* what) {
  if (x.size() != y.size()) {
    throw Error(std::string(what) + ": length mismatch (" + std::to_string(x.size()) +
                " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < min_len) {
    throw Error(std::string(what) + ": needs at least " + std::to_string(min_len) +
                " pairs");
  }
}

}  // namespace detail

inline double pearson(std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x, y, 2, "pearson");
  const double mx = compensated_mean(x);
  const double my = compensated_mean(y);
  CompensatedSum sxy, sxx, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy.add(dx * dy);
    sxx.add(dx * dx);
    syy.add(dy * dy);
  }
  if (sxx.value() == 0.0) throw Error("pearson: first vector has zero variance");
  if (syy.value() == 0.0) throw Error("pearson: second vector has zero variance");
  const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
  return std::clamp(r, -1.0, 1.0);
}

/// 1-based fractional ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    // positions i+1 .. j share rank (i + 1 + j) / 2
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x, y, 2, "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

namespace detail {

inline std::int64_t tied_pairs(std::span<const double> sorted) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

// Stable merge sort that returns the number of strict inversions.
inline std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                     std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace detail

/// Tie-corrected Kendall tau-b in O(n log n) (Knight's algorithm).
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x, y, 2, "kendall_tau_b");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }
  const std::int64_t x_ties = detail::tied_pairs(xs);
  std::int64_t joint_ties = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i + 1;
      while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
      const auto t = static_cast<std::int64_t>(j - i);
      joint_ties += t * (t - 1) / 2;
      i = j;
    }
  }
  std::vector<double> buf(n);
  const std::int64_t swaps = detail::count_inversions(ys, buf, 0, n);
  const std::int64_t y_ties = detail::tied_pairs(ys);  // ys is now sorted
  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  if (x_ties == n0) throw Error("kendall_tau_b: first vector is all tied");
  if (y_ties == n0) throw Error("kendall_tau_b: second vector is all tied");
  const std::int64_t concordant_minus_discordant = n0 - x_ties - y_ties + joint_ties - 2 * swaps;
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(n0 - x_ties) * static_cast<double>(n0 - y_ties));
}

inline double mse(std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x, y, 1, "mse");
  CompensatedSum s;
  for (std::size_t i = 0; i < x.size(); ++i) s.add((x[i] - y[i]) * (x[i] - y[i]));
  return s.value() / static_cast<double>(x.size());
}

struct MetricSet {
  double lcc = 0.0;
  double srcc = 0.0;
  double mse = 0.0;
  double ktau = 0.0;
};

inline MetricSet compute_metrics(std::span<const double> pred, std::span<const double> gt) {
  return {pearson(pred, gt), spearman(pred, gt), mse(pred, gt), kendall_tau_b(pred, gt)};
}

struct EvalReport {
  Channel ground_truth_set = Channel::kAll;
  MetricSet utterance_level;
  MetricSet system_level;
  std::size_t n_utterances = 0;
  std::size_t n_systems = 0;
};

/// Scores predictions against one ground-truth channel. Utterances lacking
/// that channel are dropped from both levels; system-level metrics compare
/// per-system means of the remaining predictions and ground truths.
inline EvalReport evaluate_predictions(const std::map<std::string, double>& preds,
                                       const std::vector<UtteranceScores>& gts,
                                       Channel gt_set) {
  std::vector<double> p, g;
  std::vector<std::pair<std::string, double>> sys_p, sys_g;
  std::vector<std::string> missing;
  for (const auto& s : gts) {
    const auto& v = channel_value(s, gt_set);
    if (!v) continue;
    auto it = preds.find(s.utterance_id);
    if (it == preds.end()) {
      missing.push_back(s.utterance_id);
      continue;
    }
    p.push_back(it->second);
    g.push_back(*v);
    sys_p.emplace_back(s.system_id, it->second);
    sys_g.emplace_back(s.system_id, *v);
  }
  if (!missing.empty()) {
    std::string msg = "predictions missing for " + std::to_string(missing.size()) +
                      " utterance(s):";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw Error(msg);
  }
  if (p.size() < 2) {
    throw Error("evaluation needs at least 2 utterances with " +
                std::string(to_string(gt_set)) + " ground truth");
  }
  const auto sp = aggregate_systems(sys_p);
  const auto sg = aggregate_systems(sys_g);
  if (sp.size() < 2) throw Error("evaluation needs at least 2 systems");
  std::vector<double> sys_pred, sys_gt;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    sys_pred.push_back(sp[i].mean);
    sys_gt.push_back(sg[i].mean);
  }
  EvalReport r;
  r.ground_truth_set = gt_set;
  r.utterance_level = compute_metrics(p, g);
  r.system_level = compute_metrics(sys_pred, sys_gt);
  r.n_utterances = p.size();
  r.n_systems = sp.size();
  return r;
}

/// (mse_female - mse_male) / mse_male, in percent.
inline double relative_gap(double mse_female, double mse_male) {
  if (!(mse_male > 0.0)) throw Error("relative_gap: male MSE must be positive");
  return 100.0 * (mse_female - mse_male) / mse_male;
}

}  // namespace genmos
