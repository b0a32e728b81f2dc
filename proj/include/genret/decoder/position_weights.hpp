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

#include "genret/decoder/relevance.hpp"
#include "genret/docid/docid.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <vector>

namespace genret::decoder {

using docid::TokenValue;

enum class LossMode {
  position_aware,  // w_t = lambda_h w^h + lambda_s w^s + lambda_e w^e
  plain,           // w_t = 1 / (L + 1), ordinary mean token cross-entropy
};

struct PositionWeightConfig {
  double lambda_h = 0.8;
  double lambda_s = 0.1;
  double lambda_e = 0.1;
  LossMode mode = LossMode::position_aware;
  /// Replaces the exponential decay with 1 / (L + 1); used for ablations.
  bool uniform_hierarchical = false;

  void validate() const;
  nlohmann::json to_json() const;
  static PositionWeightConfig from_json(const nlohmann::json& j);
};

/// e^(L - t) / sum_{i=0..L} e^i. Throws IndexError when t > L.
double hierarchical_weight(std::size_t t, std::size_t last_position);

std::vector<double> hierarchical_weights(std::size_t last_position);

struct PositionWeight {
  double hierarchical = 0.0;
  double semantic = 0.0;   // 1 when the predicted category is irrelevant, semantic layer only
  double efficient = 0.0;  // |E(target) - E(predicted)|, efficiency layer only
  double total = 0.0;
};

/// E of the node reached by appending a token value at the current position.
using EfficiencyLookup = std::function<std::optional<double>(TokenValue)>;

/// Weight of position t in a docID whose last position is `last_position`
/// and whose first `semantic_len` tokens are categories. Throws IndexError
/// when an efficiency-layer token has no E.
PositionWeight position_weight(std::size_t t, std::size_t last_position, std::size_t semantic_len,
                               TokenValue target, TokenValue predicted, const EfficiencyLookup& efficiency,
                               const RelevanceOracle& oracle, const PositionWeightConfig& config);

}  // namespace genret::decoder
