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
#include "genret/docid/kmeans.hpp"

#include <json.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace genret::docid {

struct HierarchicalResult {
  std::vector<Prefix> tokens;  // sub-docID per input point
  std::vector<std::string> warnings;
};

/// Recursive k-means: a node with at most `max_cluster_size` points
/// enumerates its members 0..n-1 (descending score, then ascending id);
/// larger nodes are split into `k` clusters, one token per level. When the
/// depth budget runs out, or k-means cannot separate the points, the node
/// falls back to enumeration and a warning is recorded. Empty `scores` and
/// `ids` default to 0 and the point index.
HierarchicalResult hierarchical_cluster(std::span<const Vector> points, std::size_t k, std::size_t max_cluster_size,
                                        std::size_t depth_budget, std::uint64_t seed,
                                        std::span<const double> scores = {}, std::span<const ItemId> ids = {});

struct DocIdBuildConfig {
  std::size_t k = 10;                  // K
  std::size_t max_cluster_size = 100;  // CS
  std::size_t max_len = 0;             // L in tokens; 0 leaves the depth budget at 8 levels
  /// Category tokens kept per docID: the last `semantic_len` path entries,
  /// 0 keeps the whole path.
  std::size_t semantic_len = 0;
  /// false: plain hierarchical k-means over the whole catalog, no semantic layer.
  bool category_guided = true;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static DocIdBuildConfig from_json(const nlohmann::json& j);
};

struct DocIdBuild {
  std::map<ItemId, DocId> docids;
  NodeScores node_scores;
  std::vector<std::string> warnings;
};

/// Category-guided hierarchical clustering. Per leaf category, items are
/// split by k-means into K clusters and each cluster is refined by
/// hierarchical_cluster; docID = category tokens ++ cluster tokens ++
/// ordinal. E of each node below the semantic layer is the mean efficient
/// score of the items under it. Throws DataError listing items that lack
/// an embedding, a score, or a category path.
DocIdBuild build_docids(const std::map<ItemId, Vector>& embeddings, const std::map<ItemId, double>& scores,
                        const std::map<ItemId, CategoryPath>& paths, const DocIdBuildConfig& config);

/// Brute-force E: mean score of the items whose docID starts with each prefix
/// longer than the item's semantic layer.
NodeScores mean_scores_by_prefix(const std::map<ItemId, DocId>& docids, const std::map<ItemId, double>& scores);

}  // namespace genret::docid
