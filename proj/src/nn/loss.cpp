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

#include "genret/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace genret::nn {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double binary_cross_entropy(double prediction, int label) {
  const double p = std::clamp(prediction, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return label ? -std::log(p) : -std::log(1.0 - p);
}

double binary_cross_entropy_grad(double prediction, int label) {
  if (prediction <= kProbabilityEpsilon || prediction >= 1.0 - kProbabilityEpsilon) return 0.0;
  return label ? -1.0 / prediction : 1.0 / (1.0 - prediction);
}

Vector log_softmax(const Vector& logits) {
  const double shift = logits.maxCoeff();
  const double log_norm = std::log((logits.array() - shift).exp().sum()) + shift;
  return (logits.array() - log_norm).matrix();
}

double softmax_cross_entropy(const Vector& logits, Eigen::Index target, Vector* d_logits) {
  const Vector lp = log_softmax(logits);
  if (d_logits) {
    *d_logits = lp.array().exp().matrix();
    (*d_logits)(target) -= 1.0;
  }
  return -lp(target);
}

}  // namespace genret::nn
