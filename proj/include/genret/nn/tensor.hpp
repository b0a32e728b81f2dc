//
// Copyright (C) 2026 The genret Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace genret::nn {

/// Dense row-major matrix of doubles. Batches are stacked along rows.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::RowVectorXd;

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the raw 64-bit engine output, so the
/// sequence does not depend on the standard library's distribution code.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform index in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

/// Fisher-Yates with uniform_index; deterministic for a given engine state.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::size_t>(last - first);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(first[i - 1], first[uniform_index(rng, i)]);
  }
}

inline double normal(Rng& rng) {
  // Box-Muller, one draw per call.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Glorot-uniform initialization: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
Tensor2 glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);

bool all_finite(const Tensor2& t);

/// A named trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor2 value;
  Tensor2 grad;

  Parameter() = default;
  Parameter(std::string n, Tensor2 v) : name(std::move(n)), value(std::move(v)) {
    grad = Tensor2::Zero(value.rows(), value.cols());
  }
  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

using ParameterList = std::vector<Parameter*>;

void zero_grads(const ParameterList& params);

/// Copies of parameter values, used to restore the last good state.
std::vector<Tensor2> snapshot(const ParameterList& params);
void restore(const ParameterList& params, const std::vector<Tensor2>& values);

/// Throws DimensionError naming `what` when the shapes differ.
void require_shape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols, const char* what);
void require_cols(const Tensor2& t, Eigen::Index cols, const char* what);

/// Row-concatenates per-row blocks: [a | b | ...].
Tensor2 hconcat(std::initializer_list<const Tensor2*> parts);

/// Flattens a matrix sequence-major (row by row) into a single row.
Vector flatten(const Tensor2& t);

}  // namespace genret::nn
