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
#include "genret/docid/docid.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace genret::docid {

/// Prefix tree over every docID of the catalog. Immutable after build;
/// children are ordered by token value, so traversal is lexicographic.
class DocIdTrie {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;

  struct Node {
    TokenValue value = 0;
    std::size_t depth = 0;  // tokens consumed from the root
    NodeId parent = kRoot;
    std::map<TokenValue, NodeId> children;
    std::optional<double> score;  // E, defined below the semantic layer
    std::optional<ItemId> item;   // set on leaves
    std::size_t leaf_count = 0;
  };

  DocIdTrie() = default;

  /// Throws DataError on duplicate docIDs, docIDs that prefix another, or a
  /// node below the semantic layer without a finite score.
  static DocIdTrie build(const std::map<ItemId, DocId>& docids, const NodeScores& scores);

  bool empty() const { return docids_.empty(); }
  std::size_t size() const { return docids_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t max_length() const { return max_length_; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  bool is_leaf(NodeId id) const { return nodes_.at(id).item.has_value(); }
  std::optional<NodeId> child(NodeId id, TokenValue value) const;
  std::optional<NodeId> find(std::span<const TokenValue> prefix) const;
  /// Token values from the root down to `id`.
  Prefix path(NodeId id) const;

  std::optional<ItemId> lookup(const DocId& docid) const;
  /// Throws IndexError for items without a docID.
  const DocId& docid_of(ItemId item) const;

  /// E of a node; throws IndexError when the node is in the semantic layer.
  double score(NodeId id) const;

  /// All (docID, item) pairs in lexicographic docID order.
  std::vector<std::pair<DocId, ItemId>> enumerate() const;
  /// Leaves below `id` in lexicographic order.
  std::vector<ItemId> items_under(NodeId id) const;

  /// Sorted distinct token values seen at each position.
  std::vector<std::vector<TokenValue>> position_values() const;

  const std::map<ItemId, DocId>& docids() const { return docids_; }
  const NodeScores& node_scores() const { return scores_; }

 private:
  std::vector<Node> nodes_;
  std::map<ItemId, DocId> docids_;
  NodeScores scores_;
  std::size_t max_length_ = 0;
};

inline constexpr int kIndexVersion = 1;

/// Versioned JSON index: docIDs with their items and semantic lengths, and
/// node scores keyed by docID-prefix text.
void save_index(const std::filesystem::path& path, const DocIdTrie& trie);

/// Throws LoadError on corrupt, truncated, or newer-version files; nothing
/// is returned in that case.
DocIdTrie load_index(const std::filesystem::path& path);

}  // namespace genret::docid
