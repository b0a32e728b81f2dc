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

#include "genret/nn/adam.hpp"

#include "genret/error.hpp"

#include <cmath>

namespace genret::nn {

Adam::Adam(ParameterList params, AdamConfig config) : params_(std::move(params)), config_(config) {
  if (!(config_.learning_rate > 0)) throw ConfigError("Adam: learning rate must be positive");
  for (const auto* p : params_) {
    first_moment_.push_back(Tensor2::Zero(p->value.rows(), p->value.cols()));
    second_moment_.push_back(Tensor2::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  for (const auto* p : params_) {
    if (!p->grad.allFinite()) throw NumericError("non-finite gradient in parameter '" + p->name + "'");
  }
  ++step_;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    auto& m = first_moment_[i];
    auto& v = second_moment_[i];
    m = config_.beta1 * m + (1.0 - config_.beta1) * p.grad;
    v = config_.beta2 * v + (1.0 - config_.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= config_.learning_rate * (m.array() / bias1) /
                       ((v.array() / bias2).sqrt() + config_.epsilon);
  }
}

}  // namespace genret::nn
