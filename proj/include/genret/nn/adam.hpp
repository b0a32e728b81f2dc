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

#include <cstdint>
#include <vector>

namespace genret::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over a fixed parameter list. Moment accumulators mirror the
/// parameter shapes; the parameters must outlive the optimizer.
class Adam {
 public:
  Adam(ParameterList params, AdamConfig config);

  /// Applies one update from the accumulated `grad` of every parameter.
  /// Throws NumericError naming the parameter on a non-finite gradient,
  /// before any parameter is modified.
  void step();

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  ParameterList params_;
  AdamConfig config_;
  std::vector<Tensor2> first_moment_;
  std::vector<Tensor2> second_moment_;
  std::int64_t step_ = 0;
};

}  // namespace genret::nn
