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

#include "genret/nn/dense.hpp"

#include "genret/error.hpp"

namespace genret::nn {

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity:
      return "identity";
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
  }
  return "identity";
}

namespace {

void apply(Activation a, Tensor2& z) {
  switch (a) {
    case Activation::identity:
      break;
    case Activation::relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::tanh:
      z = z.array().tanh().matrix();
      break;
  }
}

// Derivative expressed through the activation output.
Tensor2 derivative_from_output(Activation a, const Tensor2& y) {
  switch (a) {
    case Activation::identity:
      return Tensor2::Ones(y.rows(), y.cols());
    case Activation::relu:
      return (y.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
      return (1.0 - y.array().square()).matrix();
  }
  return Tensor2::Ones(y.rows(), y.cols());
}

}  // namespace

DenseNet::DenseNet(std::string_view name, const std::vector<Eigen::Index>& sizes,
                   const std::vector<Activation>& activations, Rng& rng) {
  if (sizes.size() < 2 || activations.size() + 1 != sizes.size()) {
    throw ConfigError("DenseNet '" + std::string(name) + "': need one activation per layer");
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] <= 0 || sizes[l + 1] <= 0) throw ConfigError("DenseNet: layer sizes must be positive");
    const std::string prefix = std::string(name) + ".layer" + std::to_string(l);
    DenseLayer layer;
    layer.weight = Parameter(prefix + ".weight", glorot_uniform(sizes[l], sizes[l + 1], rng));
    layer.bias = Parameter(prefix + ".bias", Tensor2::Zero(1, sizes[l + 1]));
    layer.activation = activations[l];
    layers_.push_back(std::move(layer));
  }
}

Tensor2 DenseNet::forward(const Tensor2& x, Cache* cache) const {
  if (layers_.empty()) throw DimensionError("DenseNet: no layers");
  require_cols(x, input_size(), "dense_forward input");
  if (cache) {
    cache->inputs.clear();
    cache->outputs.clear();
  }
  Tensor2 h = x;
  for (const auto& layer : layers_) {
    if (cache) cache->inputs.push_back(h);
    Tensor2 z = h * layer.weight.value;
    z.rowwise() += layer.bias.value.row(0);
    apply(layer.activation, z);
    if (cache) cache->outputs.push_back(z);
    h = std::move(z);
  }
  return h;
}

Tensor2 DenseNet::backward(const Cache& cache, const Tensor2& dy) {
  require_shape(dy, cache.outputs.back().rows(), output_size(), "dense backward");
  Tensor2 grad = dy;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    auto& layer = layers_[l];
    Tensor2 dz = grad.cwiseProduct(derivative_from_output(layer.activation, cache.outputs[l]));
    layer.weight.grad.noalias() += cache.inputs[l].transpose() * dz;
    layer.bias.grad.row(0) += dz.colwise().sum();
    grad = dz * layer.weight.value.transpose();
  }
  return grad;
}

ParameterList DenseNet::parameters() {
  ParameterList out;
  for (auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

Eigen::Index DenseNet::input_size() const {
  return layers_.empty() ? 0 : layers_.front().weight.value.rows();
}

Eigen::Index DenseNet::output_size() const {
  return layers_.empty() ? 0 : layers_.back().weight.value.cols();
}

Vector dense_forward(const DenseNet& net, const Vector& x) { return net.forward(x); }

}  // namespace genret::nn
