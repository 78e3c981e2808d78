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

// Versioned flat binary model files.
//
// Layout, all integers and doubles little-endian:
//   8 bytes  magic "GENMOSP\0"
//   u32      format version (1)
//   u64 x 5  d, h, e, g, gender_hidden
//   u64      seed
//   u32      tensor count (11)
//   per tensor, in ModelParams::kTensorNames order:
//     u64 element count, then that many f64 values (row-major)

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "genmos/common.hpp"
#include "genmos/model.hpp"

namespace genmos {

inline constexpr std::array<char, 8> kModelMagic = {'G', 'E', 'N', 'M', 'O', 'S', 'P', '\0'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(U)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<U>(bytes);
  } else {
    return v;
  }
}

template <typename U>
void put(std::ostream& out, U v) {
  const U le = to_little(v);
  out.write(reinterpret_cast<const char*>(&le), sizeof(U));
}

template <typename U>
U get(std::istream& in) {
  U v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(U));
  if (!in) throw Error("model file truncated");
  return to_little(v);
}

}  // namespace detail

inline void write_model(std::ostream& out, const ModelParams& p) {
  out.write(kModelMagic.data(), kModelMagic.size());
  detail::put<std::uint32_t>(out, kModelFormatVersion);
  for (std::size_t v : {p.dims.d, p.dims.h, p.dims.e, p.dims.g, p.dims.gender_hidden}) {
    detail::put<std::uint64_t>(out, v);
  }
  detail::put<std::uint64_t>(out, p.seed);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(ModelParams::kNumTensors));
  for (const auto* t : p.tensors()) {
    detail::put<std::uint64_t>(out, t->size());
    for (double x : *t) detail::put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  }
  if (!out) throw Error("failed writing model");
}

inline ModelParams read_model(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kModelMagic) throw Error("not a genmos model file");
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kModelFormatVersion) {
    throw Error("unsupported model format version " + std::to_string(version));
  }
  ModelDims dims;
  dims.d = detail::get<std::uint64_t>(in);
  dims.h = detail::get<std::uint64_t>(in);
  dims.e = detail::get<std::uint64_t>(in);
  dims.g = detail::get<std::uint64_t>(in);
  dims.gender_hidden = detail::get<std::uint64_t>(in);
  ModelParams p = ModelParams::zeros(dims);
  p.seed = detail::get<std::uint64_t>(in);
  if (detail::get<std::uint32_t>(in) != ModelParams::kNumTensors) {
    throw Error("model file has unexpected tensor count");
  }
  auto tensors = p.tensors();
  for (std::size_t t = 0; t < ModelParams::kNumTensors; ++t) {
    const auto n = detail::get<std::uint64_t>(in);
    if (n != tensors[t]->size()) {
      throw Error(std::string("model tensor ") + ModelParams::kTensorNames[t] +
                  " has wrong size");
    }
    for (double& x : *tensors[t]) x = std::bit_cast<double>(detail::get<std::uint64_t>(in));
    for (double x : *tensors[t]) {
      if (!std::isfinite(x)) throw Error("model file contains non-finite parameters");
    }
  }
  return p;
}

}  // namespace genmos
