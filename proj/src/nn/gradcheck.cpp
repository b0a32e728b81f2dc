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

#include "genret/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace genret::nn {

GradCheckResult finite_diff_gradcheck(const LossFunction& loss_fn, const ParameterList& params,
                                      double eps) {
  zero_grads(params);
  loss_fn(true);
  std::vector<Tensor2> analytic;
  analytic.reserve(params.size());
  for (const auto* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto* p = params[pi];
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& x = p->value.data()[i];
      const double saved = x;
      x = saved + eps;
      const double up = loss_fn(false);
      x = saved - eps;
      const double down = loss_fn(false);
      x = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[pi].data()[i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.coordinates;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p->name;
        result.worst_index = i;
      }
    }
  }
  zero_grads(params);
  return result;
}

}  // namespace genret::nn
