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
#include "genret/decoder/relevance.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace genret::pipeline {

/// Shape of the generated corpus. Items are spread evenly over
/// parents x leaves_per_parent leaf categories and split into latent styles
/// that drive their titles and click-through rates.
struct SyntheticConfig {
  std::size_t items = 500;
  std::size_t parents = 10;
  std::size_t leaves_per_parent = 5;
  std::size_t styles_per_leaf = 2;
  std::size_t train_queries = 200;
  std::size_t impressions_per_query = 3;
  std::size_t page_size = 6;  // shown items per impression, target included
  std::size_t users = 100;
  std::size_t context_len = 2;
  std::size_t test_queries = 100;
  double test_overlap = 0.65;  // share of test rows reusing a training (query, target) pair
  double sibling_similarity = 0.6;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticCorpus {
  Catalog catalog;
  std::vector<DatasetRow> train;
  std::vector<DatasetRow> test;
  decoder::RelevanceOracle relevance;
};

/// Deterministic for a given config. Each training query names one target
/// item (its leaf word and unique title word) and is shown in several
/// impressions where only the target is clicked.
SyntheticCorpus generate_synthetic(const SyntheticConfig& config);

/// Writes catalog.jsonl, train.jsonl, test.jsonl and relevance.jsonl.
void write_synthetic(const std::filesystem::path& dir, const SyntheticCorpus& corpus);

}  // namespace genret::pipeline
