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

#include "genret/decoder/position_weights.hpp"

#include "genret/error.hpp"

#include <cmath>

namespace genret::decoder {

void PositionWeightConfig::validate() const {
  if (!(lambda_h >= 0 && lambda_s >= 0 && lambda_e >= 0)) {
    throw ConfigError("position weights: lambda_h, lambda_s, lambda_e must be non-negative");
  }
}

nlohmann::json PositionWeightConfig::to_json() const {
  return {{"lambda_h", lambda_h},
          {"lambda_s", lambda_s},
          {"lambda_e", lambda_e},
          {"mode", mode == LossMode::plain ? "plain" : "position_aware"},
          {"uniform_hierarchical", uniform_hierarchical}};
}

PositionWeightConfig PositionWeightConfig::from_json(const nlohmann::json& j) {
  PositionWeightConfig c;
  c.lambda_h = j.value("lambda_h", c.lambda_h);
  c.lambda_s = j.value("lambda_s", c.lambda_s);
  c.lambda_e = j.value("lambda_e", c.lambda_e);
  const auto mode = j.value("mode", std::string("position_aware"));
  if (mode == "plain") {
    c.mode = LossMode::plain;
  } else if (mode == "position_aware") {
    c.mode = LossMode::position_aware;
  } else {
    throw ConfigError("unknown loss mode '" + mode + "'");
  }
  c.uniform_hierarchical = j.value("uniform_hierarchical", c.uniform_hierarchical);
  c.validate();
  return c;
}

double hierarchical_weight(std::size_t t, std::size_t last_position) {
  if (t > last_position) {
    throw IndexError("position " + std::to_string(t) + " is beyond the last docID position " +
                     std::to_string(last_position));
  }
  double norm = 0.0;
  for (std::size_t i = 0; i <= last_position; ++i) norm += std::exp(static_cast<double>(i));
  return std::exp(static_cast<double>(last_position - t)) / norm;
}

std::vector<double> hierarchical_weights(std::size_t last_position) {
  std::vector<double> w(last_position + 1);
  for (std::size_t t = 0; t <= last_position; ++t) w[t] = hierarchical_weight(t, last_position);
  return w;
}

PositionWeight position_weight(std::size_t t, std::size_t last_position, std::size_t semantic_len,
                               TokenValue target, TokenValue predicted, const EfficiencyLookup& efficiency,
                               const RelevanceOracle& oracle, const PositionWeightConfig& config) {
  if (t > last_position) {
    throw IndexError("position " + std::to_string(t) + " is beyond the last docID position " +
                     std::to_string(last_position));
  }
  PositionWeight w;
  const double uniform = 1.0 / static_cast<double>(last_position + 1);
  if (config.mode == LossMode::plain) {
    w.hierarchical = uniform;
    w.total = uniform;
    return w;
  }
  w.hierarchical = config.uniform_hierarchical ? uniform : hierarchical_weight(t, last_position);
  if (t < semantic_len) {
    w.semantic = oracle.relevant(target, predicted) ? 0.0 : 1.0;
  } else {
    const auto e_target = efficiency(target);
    const auto e_predicted = efficiency(predicted);
    if (!e_target || !e_predicted) {
      throw IndexError("missing efficient score at position " + std::to_string(t) + " for token " +
                       std::to_string(e_target ? predicted : target));
    }
    w.efficient = std::abs(*e_target - *e_predicted);
  }
  w.total = config.lambda_h * w.hierarchical + config.lambda_s * w.semantic + config.lambda_e * w.efficient;
  return w;
}

}  // namespace genret::decoder
