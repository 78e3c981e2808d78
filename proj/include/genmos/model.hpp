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

// Gender-aware multi-branch MOS predictor.
//
//   x --[W1,b1]--relu--[W2,b2]--> z                     shared encoder
//   y_avg    = w_m . z + b_m                            mean head
//   y_male   = G(concat(z, E[1]))                       gender head, group 1
//   y_female = G(concat(z, E[0]))                       gender head, group 0
//
// G is one set of weights evaluated on both embedding rows. With
// gender_hidden == 0 it is linear (w_g . v + b_g), which makes
// y_male - y_female a constant; gender_hidden > 0 inserts one ReLU layer
// (U, c) so the male/female difference can depend on the input.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "genmos/common.hpp"

namespace genmos {

struct ModelDims {
  std::size_t d = 8;  // input features
  std::size_t h = 32;  // encoder hidden width
  std::size_t e = 16;  // encoding width
  std::size_t g = 4;  // group embedding width
  std::size_t gender_hidden = 16;  // 0 = linear gender head

  std::size_t gender_input() const { return e + g; }
  std::size_t gender_out_fan_in() const { return gender_hidden > 0 ? gender_hidden : e + g; }

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Group ids of the two embedding rows.
inline constexpr std::size_t kFemaleGroup = 0;
inline constexpr std::size_t kMaleGroup = 1;

/// All trainable tensors, row-major. Scalars are stored as length-1 vectors
/// so every tensor is visited uniformly.
template <typename T>
struct BasicParams {
  ModelDims dims;
  std::uint64_t seed = 0;
  std::vector<T> w1, b1;  // h x d, h
  std::vector<T> w2, b2;  // e x h, e
  std::vector<T> w_m, b_m;  // e, 1
  std::vector<T> g_u, g_c;  // gender_hidden x (e + g), gender_hidden; empty when linear
  std::vector<T> w_g, b_g;  // gender_out_fan_in, 1
  std::vector<T> emb;  // 2 x g

  static constexpr std::size_t kNumTensors = 11;
  static constexpr std::array<const char*, kNumTensors> kTensorNames = {
      "encoder.w1", "encoder.b1", "encoder.w2", "encoder.b2", "mean_head.w",
      "mean_head.b", "gender_head.u", "gender_head.c", "gender_head.w",
      "gender_head.b", "group_embeddings"};

  std::array<std::vector<T>*, kNumTensors> tensors() {
    return {&w1, &b1, &w2, &b2, &w_m, &b_m, &g_u, &g_c, &w_g, &b_g, &emb};
  }
  std::array<const std::vector<T>*, kNumTensors> tensors() const {
    return {&w1, &b1, &w2, &b2, &w_m, &b_m, &g_u, &g_c, &w_g, &b_g, &emb};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* t : tensors()) n += t->size();
    return n;
  }

  /// Same shape, all zeros.
  static BasicParams zeros(const ModelDims& dims) {
    if (dims.d == 0 || dims.h == 0 || dims.e == 0 || dims.g == 0) {
      throw Error("model dimensions must be positive");
    }
    BasicParams p;
    p.dims = dims;
    p.w1.assign(dims.h * dims.d, T(0));
    p.b1.assign(dims.h, T(0));
    p.w2.assign(dims.e * dims.h, T(0));
    p.b2.assign(dims.e, T(0));
    p.w_m.assign(dims.e, T(0));
    p.b_m.assign(1, T(0));
    p.g_u.assign(dims.gender_hidden * dims.gender_input(), T(0));
    p.g_c.assign(dims.gender_hidden, T(0));
    p.w_g.assign(dims.gender_out_fan_in(), T(0));
    p.b_g.assign(1, T(0));
    p.emb.assign(2 * dims.g, T(0));
    return p;
  }

  template <typename U>
  BasicParams<U> cast() const {
    BasicParams<U> out;
    out.dims = dims;
    out.seed = seed;
    auto src = tensors();
    auto dst = out.tensors();
    for (std::size_t i = 0; i < kNumTensors; ++i) {
      dst[i]->assign(src[i]->begin(), src[i]->end());
    }
    return out;
  }

  void check_shape(const BasicParams& other) const {
    if (!(dims == other.dims)) throw Error("parameter shapes differ");
  }

  friend bool operator==(const BasicParams&, const BasicParams&) = default;
};

using ModelParams = BasicParams<double>;
using Gradients = BasicParams<double>;

/// Glorot-uniform weights, zero biases, embeddings uniform in [-0.1, 0.1].
/// Encoder and mean-head draws come from their own stream, so they do not
/// depend on the gender head shape.
inline ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(dims);
  p.seed = seed;
  Rng shared(derive_seed(seed, 10));
  Rng gender(derive_seed(seed, 11));
  auto glorot = [](Rng& rng, std::vector<double>& w, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w) v = rng.uniform(-limit, limit);
  };
  glorot(shared, p.w1, dims.d, dims.h);
  glorot(shared, p.w2, dims.h, dims.e);
  glorot(shared, p.w_m, dims.e, 1);
  if (dims.gender_hidden > 0) glorot(gender, p.g_u, dims.gender_input(), dims.gender_hidden);
  glorot(gender, p.w_g, dims.gender_out_fan_in(), 1);
  for (double& v : p.emb) v = gender.uniform(-0.1, 0.1);
  return p;
}

template <typename T>
struct BranchOutputs {
  T avg{};
  T male{};
  T female{};

  friend bool operator==(const BranchOutputs&, const BranchOutputs&) = default;
};

namespace detail {

template <typename T>
T relu(T v) {
  return v > T(0) ? v : T(0);
}

// out = W v + b, W is rows x cols row-major.
template <typename T>
void affine(std::span<const T> w, std::span<const T> b, std::span<const T> v,
            std::span<T> out) {
  const std::size_t cols = v.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    T acc = b[r];
    const T* row = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void check_input(const BasicParams<T>& p, std::span<const T> x) {
  if (x.size() != p.dims.d) {
    throw Error("input has dimension " + std::to_string(x.size()) + ", model expects " +
                std::to_string(p.dims.d));
  }
}

// Intermediate values of one gender-head evaluation.
template <typename T>
struct GenderTrace {
  std::vector<T> input;  // concat(z, E[group])
  std::vector<T> pre;  // U input + c (empty when linear)
  std::vector<T> act;
  T out{};
};

template <typename T>
GenderTrace<T> gender_forward(const BasicParams<T>& p, std::span<const T> z,
                              std::size_t group) {
  GenderTrace<T> tr;
  const std::size_t g = p.dims.g;
  tr.input.assign(z.begin(), z.end());
  tr.input.insert(tr.input.end(), p.emb.begin() + static_cast<std::ptrdiff_t>(group * g),
                  p.emb.begin() + static_cast<std::ptrdiff_t>((group + 1) * g));
  if (p.dims.gender_hidden == 0) {
    tr.out = dot<T>(p.w_g, tr.input) + p.b_g[0];
    return tr;
  }
  tr.pre.resize(p.dims.gender_hidden);
  affine<T>(p.g_u, p.g_c, tr.input, tr.pre);
  tr.act.resize(tr.pre.size());
  for (std::size_t k = 0; k < tr.pre.size(); ++k) tr.act[k] = relu(tr.pre[k]);
  tr.out = dot<T>(p.w_g, tr.act) + p.b_g[0];
  return tr;
}

}  // namespace detail

/// Shared encoder: z = W2 relu(W1 x + b1) + b2.
template <typename T>
std::vector<T> encode(const BasicParams<T>& p, std::span<const T> x) {
  detail::check_input(p, x);
  std::vector<T> hidden(p.dims.h);
  detail::affine<T>(p.w1, p.b1, x, hidden);
  for (T& v : hidden) v = detail::relu(v);
  std::vector<T> z(p.dims.e);
  detail::affine<T>(p.w2, p.b2, hidden, z);
  return z;
}

template <typename T>
BranchOutputs<T> forward(const BasicParams<T>& p, std::span<const T> x) {
  const auto z = encode(p, x);
  BranchOutputs<T> out;
  out.avg = detail::dot<T>(p.w_m, z) + p.b_m[0];
  out.male = detail::gender_forward(p, std::span<const T>(z), kMaleGroup).out;
  out.female = detail::gender_forward(p, std::span<const T>(z), kFemaleGroup).out;
  return out;
}

/// Training examples with per-channel presence masks. Rows with a cleared
/// mask are ignored by that channel's loss term and its gradients.
struct Batch {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> features;  // n x d row-major
  std::vector<double> targets_all, targets_male, targets_female;
  std::vector<std::uint8_t> mask_male, mask_female;

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * d, d);
  }

  void check() const {
    if (n == 0) throw Error("batch is empty");
    if (features.size() != n * d || targets_all.size() != n || targets_male.size() != n ||
        targets_female.size() != n || mask_male.size() != n || mask_female.size() != n) {
      throw Error("batch arrays have inconsistent lengths");
    }
  }
};

/// L_avg + L_male + L_female; each term is the MSE over that channel's
/// unmasked rows, and a term with no unmasked rows contributes 0.
template <typename T>
T loss(std::span<const BranchOutputs<T>> preds, const Batch& batch) {
  batch.check();
  if (preds.size() != batch.n) throw Error("prediction count does not match batch");
  T sum_avg = T(0), sum_m = T(0), sum_f = T(0);
  std::size_t n_m = 0, n_f = 0;
  for (std::size_t i = 0; i < batch.n; ++i) {
    const T da = preds[i].avg - T(batch.targets_all[i]);
    sum_avg += da * da;
    if (batch.mask_male[i]) {
      const T dm = preds[i].male - T(batch.targets_male[i]);
      sum_m += dm * dm;
      ++n_m;
    }
    if (batch.mask_female[i]) {
      const T df = preds[i].female - T(batch.targets_female[i]);
      sum_f += df * df;
      ++n_f;
    }
  }
  T total = sum_avg / T(batch.n);
  if (n_m > 0) total += sum_m / T(n_m);
  if (n_f > 0) total += sum_f / T(n_f);
  return total;
}

/// Forward pass over a batch followed by loss().
template <typename T>
T batch_loss(const BasicParams<T>& p, const Batch& batch) {
  batch.check();
  std::vector<BranchOutputs<T>> preds(batch.n);
  std::vector<T> x(batch.d);
  for (std::size_t i = 0; i < batch.n; ++i) {
    const auto r = batch.row(i);
    std::copy(r.begin(), r.end(), x.begin());
    preds[i] = forward(p, std::span<const T>(x));
  }
  return loss<T>(preds, batch);
}

struct BackwardResult {
  double loss = 0.0;
  Gradients grads;
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* layer) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(std::string("non-finite value in ") + layer);
  }
}

inline void accumulate_gender(const ModelParams& p, const GenderTrace<double>& tr, double g_out,
                              std::size_t group, Gradients& gr, std::span<double> dz) {
  const std::size_t e = p.dims.e;
  const std::size_t g = p.dims.g;
  gr.b_g[0] += g_out;
  std::vector<double> d_input(p.dims.gender_input(), 0.0);
  if (p.dims.gender_hidden == 0) {
    for (std::size_t k = 0; k < tr.input.size(); ++k) {
      gr.w_g[k] += g_out * tr.input[k];
      d_input[k] = g_out * p.w_g[k];
    }
  } else {
    const std::size_t cols = tr.input.size();
    for (std::size_t k = 0; k < tr.act.size(); ++k) {
      gr.w_g[k] += g_out * tr.act[k];
      if (!(tr.pre[k] > 0.0)) continue;
      const double d_pre = g_out * p.w_g[k];
      gr.g_c[k] += d_pre;
      double* du = gr.g_u.data() + k * cols;
      const double* u = p.g_u.data() + k * cols;
      for (std::size_t c = 0; c < cols; ++c) {
        du[c] += d_pre * tr.input[c];
        d_input[c] += d_pre * u[c];
      }
    }
  }
  for (std::size_t k = 0; k < e; ++k) dz[k] += d_input[k];
  for (std::size_t k = 0; k < g; ++k) gr.emb[group * g + k] += d_input[e + k];
}

}  // namespace detail

/// Loss and exact reverse-mode gradients. With gender_branch false the
/// gender head is not evaluated and only L_avg is optimized.
inline BackwardResult backward(const ModelParams& p, const Batch& batch,
                               bool gender_branch = true) {
  batch.check();
  if (batch.d != p.dims.d) {
    throw Error("batch feature dimension " + std::to_string(batch.d) +
                " does not match model input " + std::to_string(p.dims.d));
  }
  const ModelDims& dm = p.dims;
  BackwardResult res;
  res.grads = Gradients::zeros(dm);
  res.grads.seed = p.seed;
  Gradients& gr = res.grads;

  std::size_t n_m = 0, n_f = 0;
  if (gender_branch) {
    for (std::size_t i = 0; i < batch.n; ++i) {
      n_m += batch.mask_male[i] ? 1 : 0;
      n_f += batch.mask_female[i] ? 1 : 0;
    }
  }
  double sum_avg = 0.0, sum_m = 0.0, sum_f = 0.0;
  std::vector<double> pre1(dm.h), hidden(dm.h), z(dm.e), dz(dm.e), dh(dm.h);
  for (std::size_t i = 0; i < batch.n; ++i) {
    const auto x = batch.row(i);
    detail::affine<double>(p.w1, p.b1, x, pre1);
    detail::require_finite(pre1, "encoder layer 1");
    for (std::size_t k = 0; k < dm.h; ++k) hidden[k] = detail::relu(pre1[k]);
    detail::affine<double>(p.w2, p.b2, hidden, z);
    detail::require_finite(z, "encoder layer 2");

    const double y_avg = detail::dot<double>(p.w_m, z) + p.b_m[0];
    if (!std::isfinite(y_avg)) throw Error("non-finite value in mean head");
    const double r_avg = y_avg - batch.targets_all[i];
    sum_avg += r_avg * r_avg;
    const double g_avg = 2.0 * r_avg / static_cast<double>(batch.n);
    for (std::size_t k = 0; k < dm.e; ++k) {
      gr.w_m[k] += g_avg * z[k];
      dz[k] = g_avg * p.w_m[k];
    }
    gr.b_m[0] += g_avg;

    if (gender_branch) {
      if (batch.mask_male[i]) {
        const auto tr = detail::gender_forward(p, std::span<const double>(z), kMaleGroup);
        if (!std::isfinite(tr.out)) throw Error("non-finite value in gender head");
        const double r = tr.out - batch.targets_male[i];
        sum_m += r * r;
        detail::accumulate_gender(p, tr, 2.0 * r / static_cast<double>(n_m), kMaleGroup, gr, dz);
      }
      if (batch.mask_female[i]) {
        const auto tr = detail::gender_forward(p, std::span<const double>(z), kFemaleGroup);
        if (!std::isfinite(tr.out)) throw Error("non-finite value in gender head");
        const double r = tr.out - batch.targets_female[i];
        sum_f += r * r;
        detail::accumulate_gender(p, tr, 2.0 * r / static_cast<double>(n_f), kFemaleGroup, gr,
                                  dz);
      }
    }

    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t r = 0; r < dm.e; ++r) {
      gr.b2[r] += dz[r];
      double* dw = gr.w2.data() + r * dm.h;
      const double* w = p.w2.data() + r * dm.h;
      for (std::size_t c = 0; c < dm.h; ++c) {
        dw[c] += dz[r] * hidden[c];
        dh[c] += dz[r] * w[c];
      }
    }
    for (std::size_t r = 0; r < dm.h; ++r) {
      if (!(pre1[r] > 0.0)) continue;
      gr.b1[r] += dh[r];
      double* dw = gr.w1.data() + r * dm.d;
      for (std::size_t c = 0; c < dm.d; ++c) dw[c] += dh[r] * x[c];
    }
  }
  res.loss = sum_avg / static_cast<double>(batch.n);
  if (n_m > 0) res.loss += sum_m / static_cast<double>(n_m);
  if (n_f > 0) res.loss += sum_f / static_cast<double>(n_f);
  for (const auto* t : gr.tensors()) detail::require_finite(*t, "gradients");
  return res;
}

/// theta <- theta - lr * grad for every tensor.
inline ModelParams sgd_step(const ModelParams& p, const Gradients& grads, double lr) {
  p.check_shape(grads);
  ModelParams out = p;
  auto dst = out.tensors();
  auto src = grads.tensors();
  for (std::size_t t = 0; t < ModelParams::kNumTensors; ++t) {
    auto& w = *dst[t];
    const auto& g = *src[t];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  }
  return out;
}

/// Largest relative disagreement between `analytic` and central differences
/// of the batch loss, |a - c| / max(|a|, |c|, 1e-8). Perturbed losses are
/// evaluated in long double so that difference quotients are not dominated
/// by double rounding.
inline double grad_check_against(const ModelParams& p, const Batch& batch,
                                 const Gradients& analytic, double epsilon,
                                 bool gender_branch = true) {
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) throw Error("grad_check: epsilon must be in (0, 1e-3]");
  p.check_shape(analytic);
  using Ext = long double;
  Batch b = batch;
  if (!gender_branch) {
    std::fill(b.mask_male.begin(), b.mask_male.end(), std::uint8_t{0});
    std::fill(b.mask_female.begin(), b.mask_female.end(), std::uint8_t{0});
  }
  BasicParams<Ext> work = p.cast<Ext>();
  auto tensors = work.tensors();
  auto grads = analytic.tensors();
  double worst = 0.0;
  for (std::size_t t = 0; t < ModelParams::kNumTensors; ++t) {
    auto& w = *tensors[t];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Ext orig = w[i];
      w[i] = orig + Ext(epsilon);
      const Ext up = batch_loss(work, b);
      w[i] = orig - Ext(epsilon);
      const Ext down = batch_loss(work, b);
      w[i] = orig;
      const double central = static_cast<double>((up - down) / (Ext(2) * Ext(epsilon)));
      const double a = (*grads[t])[i];
      const double denom = std::max({std::abs(a), std::abs(central), 1e-8});
      worst = std::max(worst, std::abs(a - central) / denom);
    }
  }
  return worst;
}

inline double grad_check(const ModelParams& p, const Batch& batch, double epsilon,
                         bool gender_branch = true) {
  const auto analytic = backward(p, batch, gender_branch);
  return grad_check_against(p, batch, analytic.grads, epsilon, gender_branch);
}

}  // namespace genmos
