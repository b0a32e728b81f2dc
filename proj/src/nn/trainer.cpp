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

#include "genret/nn/trainer.hpp"

#include "genret/error.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace genret::nn {

std::vector<double> smoothed(std::span<const double> losses, std::size_t window) {
  std::vector<double> out;
  if (window == 0 || losses.size() < window) return out;
  for (std::size_t i = 0; i + window <= losses.size(); ++i) {
    out.push_back(std::accumulate(losses.begin() + i, losses.begin() + i + window, 0.0) /
                  static_cast<double>(window));
  }
  return out;
}

TrainLog run_training(const ParameterList& params, std::size_t n_samples, const TrainLoopConfig& config,
                      const BatchLoss& batch_loss, const EpochHook& on_epoch) {
  if (n_samples == 0) throw DataError("training set is empty");
  if (config.batch_size == 0) throw ConfigError("batch size must be at least 1");

  Adam adam(params, {.learning_rate = config.learning_rate});
  Rng rng(config.seed);
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Tensor2> last_good = snapshot(params);

  TrainLog log;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n_samples; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n_samples - start);
      std::span<const std::size_t> batch(order.data() + start, len);
      zero_grads(params);
      const double loss = batch_loss(batch, true);
      if (!std::isfinite(loss)) {
        restore(params, last_good);
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) +
                           "; parameters restored to the last completed epoch");
      }
      try {
        adam.step();
      } catch (const NumericError&) {
        restore(params, last_good);
        throw;
      }
      total += loss;
      ++batches;
    }
    const double mean = total / static_cast<double>(batches);
    log.epoch_losses.push_back(mean);
    last_good = snapshot(params);
    if (on_epoch) on_epoch(epoch, mean);
  }
  zero_grads(params);

  const auto smooth = smoothed(log.epoch_losses, config.smoothing_window);
  for (std::size_t i = 1; i < smooth.size(); ++i) {
    if (smooth[i] > smooth[i - 1]) {
      std::ostringstream msg;
      msg << "training loss increased: smoothed loss " << smooth[i - 1] << " -> " << smooth[i]
          << " at epoch " << (i + config.smoothing_window - 1);
      log.warnings.push_back(msg.str());
      break;
    }
  }
  return log;
}

}  // namespace genret::nn
