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

#include "genret/nn/attention.hpp"

#include "genret/error.hpp"

namespace genret::nn {

Tensor2 softmax_rows(const Tensor2& logits) {
  Tensor2 out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double shift = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - shift).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Tensor2 attention(const Tensor2& q, const Tensor2& k, const Tensor2& v, Eigen::Index d_k,
                  AttentionCache* cache) {
  if (d_k <= 0) throw DimensionError("attention: d_k must be positive");
  require_cols(q, d_k, "attention queries");
  require_cols(k, d_k, "attention keys");
  if (k.rows() != v.rows()) throw DimensionError("attention: keys and values need equal row counts");
  if (k.rows() == 0) throw DimensionError("attention: at least one key is required");

  const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));
  Tensor2 weights = softmax_rows((q * k.transpose()) * scale);
  Tensor2 out = weights * v;
  if (cache) {
    cache->queries = q;
    cache->keys = k;
    cache->values = v;
    cache->weights = std::move(weights);
    cache->scale = scale;
  }
  return out;
}

AttentionGrads attention_backward(const AttentionCache& cache, const Tensor2& d_out) {
  const Tensor2& a = cache.weights;
  require_shape(d_out, a.rows(), cache.values.cols(), "attention backward");
  AttentionGrads g;
  g.values = a.transpose() * d_out;
  const Tensor2 d_weights = d_out * cache.values.transpose();
  // Softmax Jacobian per row: dS = A * (dA - <dA, A>).
  const Eigen::VectorXd inner = d_weights.cwiseProduct(a).rowwise().sum();
  Tensor2 d_scores = a.cwiseProduct(d_weights - inner.replicate(1, a.cols()));
  d_scores *= cache.scale;
  g.queries = d_scores * cache.keys;
  g.keys = d_scores.transpose() * cache.queries;
  return g;
}

}  // namespace genret::nn
