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

// Deliberately naive reference implementations used to check the library.
// Nothing here calls into genmos numerics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

inline double sample_var(const std::vector<double>& v) {
  const long double m = mean(v);
  long double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return static_cast<double>(s / (v.size() - 1));
}

// Textbook covariance formula in long double.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(cxy / std::sqrt(cxx * cyy));
}

// O(n^2) rank: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) less += 1;
      if (w == v[i]) equal += 1;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

struct PairCounts {
  std::int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0, n0 = 0;
};

inline PairCounts count_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++c.n0;
      const bool tx = x[i] == x[j];
      const bool ty = y[i] == y[j];
      if (tx) ++c.ties_x;
      if (ty) ++c.ties_y;
      if (tx || ty) continue;
      if ((x[i] < x[j]) == (y[i] < y[j])) {
        ++c.concordant;
      } else {
        ++c.discordant;
      }
    }
  }
  return c;
}

inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const PairCounts c = count_pairs(x, y);
  return static_cast<double>(c.concordant - c.discordant) /
         std::sqrt(static_cast<double>(c.n0 - c.ties_x) * static_cast<double>(c.n0 - c.ties_y));
}

inline double mse(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s / x.size();
}

// Student t density; the normalizing constant is computed once.
inline double t_pdf(double x, double df, double norm) {
  return norm * std::exp(-(df + 1) / 2 * std::log1p(x * x / df));
}

// P(T > t) = 1/2 - integral_0^t pdf, composite Simpson's rule on [0, t]
// with `steps` (even) panels, accumulated in long double.
inline double t_sf_quadrature(double t, double df, long steps) {
  if (steps % 2) ++steps;
  const double norm = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                      std::sqrt(df * std::numbers::pi);
  const long double h = static_cast<long double>(t) / steps;
  long double odd = 0, even = 0;
  for (long i = 1; i < steps; ++i) {
    const double v = t_pdf(static_cast<double>(i * h), df, norm);
    if (i % 2) {
      odd += v;
    } else {
      even += v;
    }
  }
  const long double s = t_pdf(0, df, norm) + t_pdf(t, df, norm) + 4 * odd + 2 * even;
  return static_cast<double>(0.5L - s * h / 3);
}

struct Welch {
  double t, df, p;
};

// The textbook formulas; the p-value comes from a quadrature of the density.
inline Welch welch(const std::vector<double>& a, const std::vector<double>& b) {
  const double va = sample_var(a) / a.size();
  const double vb = sample_var(b) / b.size();
  const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  const double df = std::pow(va + vb, 2) /
                    (va * va / (a.size() - 1.0) + vb * vb / (b.size() - 1.0));
  return {t, df, 2.0 * t_sf_quadrature(std::abs(t), df, 20000)};
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// Group-by mean keyed by string.
inline std::map<std::string, double> group_mean(
    const std::vector<std::pair<std::string, double>>& rows) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& [k, v] : rows) {
    acc[k].first += v;
    acc[k].second += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [k, a] : acc) out[k] = a.first / a.second;
  return out;
}

// Small helpers for random instances.
inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo,
                                         double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline std::vector<double> random_ties(std::mt19937_64& rng, std::size_t n, int levels) {
  std::uniform_int_distribution<int> u(1, levels);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace oracle
