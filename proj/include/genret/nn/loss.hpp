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

/// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityEpsilon = 1e-7;

double sigmoid(double z);

/// -(y log p + (1 - y) log(1 - p)) with p clamped.
double binary_cross_entropy(double prediction, int label);

/// dBCE/dp; zero where the clamp is active.
double binary_cross_entropy_grad(double prediction, int label);

Vector log_softmax(const Vector& logits);

/// Cross-entropy of `target` under softmax(logits) and its gradient w.r.t. logits.
double softmax_cross_entropy(const Vector& logits, Eigen::Index target, Vector* d_logits);

}  // namespace genret::nn
