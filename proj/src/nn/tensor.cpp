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

#include "genret/nn/tensor.hpp"

#include "genret/error.hpp"

#include <string>

namespace genret::nn {

Tensor2 glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor2 t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = uniform(rng, -limit, limit);
  return t;
}

bool all_finite(const Tensor2& t) { return t.allFinite(); }

void zero_grads(const ParameterList& params) {
  for (auto* p : params) p->zero_grad();
}

std::vector<Tensor2> snapshot(const ParameterList& params) {
  std::vector<Tensor2> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back(p->value);
  return out;
}

void restore(const ParameterList& params, const std::vector<Tensor2>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

void require_shape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (t.rows() != rows || t.cols() != cols) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(t.rows()) + "x" +
                         std::to_string(t.cols()));
  }
}

void require_cols(const Tensor2& t, Eigen::Index cols, const char* what) {
  if (t.cols() != cols) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(cols) +
                         " columns, got " + std::to_string(t.cols()));
  }
}

Tensor2 hconcat(std::initializer_list<const Tensor2*> parts) {
  Eigen::Index rows = -1;
  Eigen::Index cols = 0;
  for (const auto* p : parts) {
    if (rows >= 0 && p->rows() != rows) throw DimensionError("hconcat: row counts differ");
    rows = p->rows();
    cols += p->cols();
  }
  Tensor2 out(rows < 0 ? 0 : rows, cols);
  Eigen::Index offset = 0;
  for (const auto* p : parts) {
    out.middleCols(offset, p->cols()) = *p;
    offset += p->cols();
  }
  return out;
}

Vector flatten(const Tensor2& t) {
  // Row-major storage makes the raw buffer sequence-major already.
  return Eigen::Map<const Vector>(t.data(), t.size());
}

}  // namespace genret::nn
