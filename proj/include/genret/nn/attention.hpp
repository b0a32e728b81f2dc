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

#include "genret/nn/tensor.hpp"

namespace genret::nn {

struct AttentionCache {
  Tensor2 queries;
  Tensor2 keys;
  Tensor2 values;
  Tensor2 weights;  // softmax(Q K^T / sqrt(d_k)), one row per query
  double scale = 1.0;
};

struct AttentionGrads {
  Tensor2 queries;
  Tensor2 keys;
  Tensor2 values;
};

/// Row-wise softmax, max-shifted.
Tensor2 softmax_rows(const Tensor2& logits);

/// Scaled dot-product attention softmax(Q K^T / sqrt(d_k)) V.
/// Output has Q's rows and V's columns. Flattening is left to the caller.
Tensor2 attention(const Tensor2& q, const Tensor2& k, const Tensor2& v, Eigen::Index d_k,
                  AttentionCache* cache = nullptr);

AttentionGrads attention_backward(const AttentionCache& cache, const Tensor2& d_out);

}  // namespace genret::nn
