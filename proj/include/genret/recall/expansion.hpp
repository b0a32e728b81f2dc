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
#include "genret/decoder/beam_search.hpp"
#include "genret/docid/trie.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace genret::recall {

enum class RecallTag { direct, cluster, i2i };  // merge priority order

std::string_view to_string(RecallTag tag);

struct RecallEntry {
  ItemId item = 0;
  RecallTag tag = RecallTag::direct;
  double score = 0.0;
  bool operator==(const RecallEntry&) const = default;
};

/// Ordered recall list; item ids are unique.
struct RecallSet {
  std::vector<RecallEntry> entries;
  std::size_t recall_num() const { return entries.size(); }
  std::vector<ItemId> items() const;
};

inline constexpr std::size_t kDefaultRecallCap = 5000;

/// Decoded items first, in the given order and scored by log-prob, then
/// every other item sharing the first `prefix_len` tokens with a decoded
/// docID, by leaf E descending and item id ascending. A prefix length at or
/// beyond a docID's length matches only that docID.
RecallSet cluster_expand(std::span<const decoder::BeamResult> decoded, const docid::DocIdTrie& trie,
                         std::size_t prefix_len);

struct UserItem {
  std::string user;
  ItemId item = 0;
};

/// item -> neighbors by descending score, ties by ascending id.
using I2ITable = std::map<ItemId, std::vector<std::pair<ItemId, double>>>;

/// Swing similarity s(i, j) = sum over unordered user pairs u < v that both
/// touched i and j of 1 / (alpha + |I_u ∩ I_v|). Duplicate rows count once.
/// Pairs with no contributing user pair are omitted. Lists are cut to
/// `top_n` neighbors; 0 keeps all.
I2ITable swing_scores(std::span<const UserItem> interactions, double alpha = 1.0, std::size_t top_n = 0);

/// Union of each seed's first `per_seed_n` neighbors, scored by the maximum
/// over seeds and ordered by score descending, then id.
RecallSet i2i_expand(std::span<const ItemId> seeds, const I2ITable& table, std::size_t per_seed_n);

/// Tier order direct > cluster > i2i, by score within a tier, first
/// occurrence of each item kept, truncated to `cap`.
RecallSet merge_recall(const RecallSet& direct, const RecallSet& cluster, const RecallSet& i2i,
                       std::size_t cap = kDefaultRecallCap);

/// JSONL {"item_id", "neighbors": [[item_id, score], ...]}.
void write_i2i_table(const std::filesystem::path& path, const I2ITable& table);
/// Throws LoadError on malformed lines.
I2ITable read_i2i_table(const std::filesystem::path& path);

}  // namespace genret::recall
