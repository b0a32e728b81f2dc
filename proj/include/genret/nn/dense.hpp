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

#include <string>
#include <string_view>
#include <vector>

namespace genret::nn {

enum class Activation { identity, relu, tanh };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

struct DenseLayer {
  Parameter weight;  // in x out
  Parameter bias;    // 1 x out
  Activation activation = Activation::identity;
};

/// Multilayer perceptron: y = act(x W + b) per layer, rows are samples.
class DenseNet {
 public:
  struct Cache {
    std::vector<Tensor2> inputs;   // input to each layer
    std::vector<Tensor2> outputs;  // post-activation output of each layer
  };

  DenseNet() = default;
  /// `sizes` has one more entry than `activations`.
  DenseNet(std::string_view name, const std::vector<Eigen::Index>& sizes,
           const std::vector<Activation>& activations, Rng& rng);

  Tensor2 forward(const Tensor2& x, Cache* cache = nullptr) const;

  /// Accumulates parameter gradients for upstream gradient `dy` and returns dL/dx.
  Tensor2 backward(const Cache& cache, const Tensor2& dy);

  ParameterList parameters();
  Eigen::Index input_size() const;
  Eigen::Index output_size() const;
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

/// Convenience for single-row use.
Vector dense_forward(const DenseNet& net, const Vector& x);

}  // namespace genret::nn
