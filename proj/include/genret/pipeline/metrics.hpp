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

#include "genret/data.hpp"

#include <span>
#include <vector>

namespace genret::pipeline {

/// Fraction of queries with any truth item among their first k predictions.
/// Throws ConfigError for k = 0 and DimensionError when the lists differ in length.
double recall_at_k(std::span<const std::vector<ItemId>> ranked, std::span<const std::vector<ItemId>> truth,
                   std::size_t k);

struct ZeroShotSplit {
  std::vector<DatasetRow> rows;  // test rows whose (query, target) never occurs in training
  double removed_fraction = 0.0;
};

/// Drops test rows whose (query, target) pair occurs in the training rows.
ZeroShotSplit zero_shot_split(std::span<const DatasetRow> train, std::span<const DatasetRow> test);

}  // namespace genret::pipeline
