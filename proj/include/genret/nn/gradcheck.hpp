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

#include <functional>
#include <string>

namespace genret::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  Eigen::Index coordinates = 0;
};

/// `loss_fn(true)` returns the loss and accumulates analytic gradients into
/// each parameter's `grad`; `loss_fn(false)` only returns the loss.
using LossFunction = std::function<double(bool accumulate_grad)>;

/// Central differences (f(x + eps) - f(x - eps)) / (2 eps) on every
/// coordinate, compared with the analytic gradient via
/// |a - n| / max(1e-8, |a| + |n|). Parameters are restored afterwards.
GradCheckResult finite_diff_gradcheck(const LossFunction& loss_fn, const ParameterList& params,
                                      double eps = 1e-5);

}  // namespace genret::nn
