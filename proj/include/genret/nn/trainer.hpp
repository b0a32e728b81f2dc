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

#include "genret/nn/adam.hpp"
#include "genret/nn/tensor.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace genret::nn {

struct TrainLoopConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  /// Epoch losses are averaged over this many epochs before checking that
  /// training is not getting worse.
  std::size_t smoothing_window = 3;
};

struct TrainLog {
  std::vector<double> epoch_losses;
  std::vector<std::string> warnings;
};

/// Mean loss over `batch` (sample indices); accumulates gradients when asked.
using BatchLoss = std::function<double(std::span<const std::size_t> batch, bool accumulate_grad)>;
using EpochHook = std::function<void(std::size_t epoch, double mean_loss)>;

/// Shuffled minibatch Adam over `n_samples`. A non-finite batch loss or
/// gradient restores the parameters of the last completed epoch and throws
/// NumericError.
TrainLog run_training(const ParameterList& params, std::size_t n_samples, const TrainLoopConfig& config,
                      const BatchLoss& batch_loss, const EpochHook& on_epoch = {});

/// Moving averages of `losses` over `window`; empty when there are fewer values.
std::vector<double> smoothed(std::span<const double> losses, std::size_t window);

}  // namespace genret::nn
