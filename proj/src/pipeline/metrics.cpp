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

#include "genret/pipeline/metrics.hpp"

#include "genret/error.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

namespace genret::pipeline {

double recall_at_k(std::span<const std::vector<ItemId>> ranked, std::span<const std::vector<ItemId>> truth,
                   std::size_t k) {
  if (k == 0) throw ConfigError("Recall@k needs k >= 1");
  if (ranked.size() != truth.size()) throw DimensionError("Recall@k: one truth list per ranked list required");
  if (ranked.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t q = 0; q < ranked.size(); ++q) {
    const auto n = std::min(k, ranked[q].size());
    const bool hit = std::any_of(ranked[q].begin(), ranked[q].begin() + static_cast<std::ptrdiff_t>(n),
                                 [&](ItemId id) { return std::find(truth[q].begin(), truth[q].end(), id) != truth[q].end(); });
    hits += hit ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(ranked.size());
}

ZeroShotSplit zero_shot_split(std::span<const DatasetRow> train, std::span<const DatasetRow> test) {
  std::set<std::pair<std::string, ItemId>> seen;
  for (const auto& r : train) seen.emplace(r.query, r.target);
  ZeroShotSplit out;
  for (const auto& r : test) {
    if (!seen.count({r.query, r.target})) out.rows.push_back(r);
  }
  if (!test.empty()) {
    out.removed_fraction =
        static_cast<double>(test.size() - out.rows.size()) / static_cast<double>(test.size());
  }
  return out;
}

}  // namespace genret::pipeline
