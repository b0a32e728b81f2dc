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

#include "genret/docid/builder.hpp"

#include "genret/error.hpp"

#include <algorithm>
#include <numeric>

namespace genret::docid {

namespace {

constexpr std::size_t kDefaultDepthBudget = 8;

std::uint64_t node_seed(std::uint64_t seed, std::span<const TokenValue> path) {
  std::string bytes = std::to_string(seed) + ":" + prefix_to_string(path);
  return fnv1a(bytes);
}

struct Recursion {
  std::span<const Vector> points;
  std::size_t k;
  std::size_t max_cluster_size;
  std::uint64_t seed;
  std::vector<double> scores;
  std::vector<ItemId> ids;
  HierarchicalResult* out;

  void enumerate(std::vector<std::size_t> members, const Prefix& prefix) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return ids[a] < ids[b];
    });
    for (std::size_t ord = 0; ord < members.size(); ++ord) {
      Prefix t = prefix;
      t.push_back(static_cast<TokenValue>(ord));
      out->tokens[members[ord]] = std::move(t);
    }
  }

  void run(const std::vector<std::size_t>& members, std::size_t depth_left, const Prefix& prefix) {
    if (members.size() <= max_cluster_size) {
      enumerate(members, prefix);
      return;
    }
    if (depth_left == 0) {
      out->warnings.push_back("depth budget exhausted at node [" + prefix_to_string(prefix) + "] with " +
                              std::to_string(members.size()) + " items; enumerating");
      enumerate(members, prefix);
      return;
    }
    std::vector<Vector> sub;
    sub.reserve(members.size());
    for (auto m : members) sub.push_back(points[m]);
    const auto km = kmeans(sub, k, node_seed(seed, prefix));
    if (km.non_empty() < 2) {
      out->warnings.push_back("k-means could not split node [" + prefix_to_string(prefix) + "] with " +
                              std::to_string(members.size()) + " items; enumerating");
      enumerate(members, prefix);
      return;
    }
    std::vector<std::vector<std::size_t>> groups(k);
    for (std::size_t i = 0; i < members.size(); ++i) groups[km.assignments[i]].push_back(members[i]);
    for (std::size_t c = 0; c < k; ++c) {
      if (groups[c].empty()) continue;
      Prefix child = prefix;
      child.push_back(static_cast<TokenValue>(c));
      run(groups[c], depth_left - 1, child);
    }
  }
};

}  // namespace

HierarchicalResult hierarchical_cluster(std::span<const Vector> points, std::size_t k, std::size_t max_cluster_size,
                                        std::size_t depth_budget, std::uint64_t seed, std::span<const double> scores,
                                        std::span<const ItemId> ids) {
  if (depth_budget < 1) throw ConfigError("hierarchical_cluster: depth budget must be at least 1");
  if (k < 1) throw ConfigError("hierarchical_cluster: K must be at least 1");
  if (max_cluster_size < 1) throw ConfigError("hierarchical_cluster: CS must be at least 1");
  const std::size_t n = points.size();
  if ((!scores.empty() && scores.size() != n) || (!ids.empty() && ids.size() != n)) {
    throw DimensionError("hierarchical_cluster: scores/ids must match the point count");
  }
  HierarchicalResult result;
  result.tokens.resize(n);
  if (n == 0) return result;
  Recursion r{points, k, max_cluster_size, seed, {}, {}, &result};
  r.scores = scores.empty() ? std::vector<double>(n, 0.0) : std::vector<double>(scores.begin(), scores.end());
  if (ids.empty()) {
    r.ids.resize(n);
    std::iota(r.ids.begin(), r.ids.end(), ItemId{0});
  } else {
    r.ids.assign(ids.begin(), ids.end());
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  r.run(all, depth_budget, {});
  return result;
}

void DocIdBuildConfig::validate() const {
  if (k < 1) throw ConfigError("docids: K must be at least 1");
  if (max_cluster_size < 1) throw ConfigError("docids: CS must be at least 1");
}

nlohmann::json DocIdBuildConfig::to_json() const {
  return {{"k", k},
          {"max_cluster_size", max_cluster_size},
          {"max_len", max_len},
          {"semantic_len", semantic_len},
          {"category_guided", category_guided},
          {"seed", seed}};
}

DocIdBuildConfig DocIdBuildConfig::from_json(const nlohmann::json& j) {
  DocIdBuildConfig c;
  c.k = j.value("k", c.k);
  c.max_cluster_size = j.value("max_cluster_size", c.max_cluster_size);
  c.max_len = j.value("max_len", c.max_len);
  c.semantic_len = j.value("semantic_len", c.semantic_len);
  c.category_guided = j.value("category_guided", c.category_guided);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

NodeScores mean_scores_by_prefix(const std::map<ItemId, DocId>& docids, const std::map<ItemId, double>& scores) {
  std::map<Prefix, std::pair<double, std::size_t>> acc;
  for (const auto& [id, doc] : docids) {
    const double s = scores.at(id);
    Prefix p(doc.values().begin(), doc.values().begin() + static_cast<std::ptrdiff_t>(doc.semantic_len()));
    for (std::size_t t = doc.semantic_len(); t < doc.size(); ++t) {
      p.push_back(doc[t]);
      auto& [sum, count] = acc[p];
      sum += s;
      ++count;
    }
  }
  NodeScores out;
  for (const auto& [p, sc] : acc) out.emplace(p, sc.first / static_cast<double>(sc.second));
  return out;
}

DocIdBuild build_docids(const std::map<ItemId, Vector>& embeddings, const std::map<ItemId, double>& scores,
                        const std::map<ItemId, CategoryPath>& paths, const DocIdBuildConfig& config) {
  config.validate();
  std::vector<ItemId> missing;
  std::map<ItemId, bool> all;
  for (const auto& [id, _] : embeddings) all[id] = true;
  for (const auto& [id, _] : scores) all[id] = true;
  for (const auto& [id, _] : paths) all[id] = true;
  for (const auto& [id, _] : all) {
    if (!embeddings.count(id) || !scores.count(id) || !paths.count(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string msg = "items missing an embedding, score, or category path:";
    for (auto id : missing) msg += " " + std::to_string(id);
    throw DataError(msg);
  }
  if (all.empty()) throw DataError("build_docids: no items");

  // Group by semantic tokens; std::map keeps the outer loop order stable.
  std::map<Prefix, std::vector<ItemId>> groups;
  for (const auto& [id, path] : paths) {
    if (path.empty()) throw DataError("item " + std::to_string(id) + " has an empty category path");
    Prefix semantic;
    if (config.category_guided) {
      if (config.semantic_len > path.size()) {
        throw ConfigError("semantic_len " + std::to_string(config.semantic_len) + " exceeds category path of item " +
                          std::to_string(id));
      }
      const std::size_t s = config.semantic_len == 0 ? path.size() : config.semantic_len;
      semantic.assign(path.end() - static_cast<std::ptrdiff_t>(s), path.end());
    }
    groups[semantic].push_back(id);
  }

  DocIdBuild build;
  for (const auto& [semantic, ids] : groups) {
    std::size_t depth_budget = kDefaultDepthBudget;
    if (config.max_len > 0) {
      if (config.max_len < semantic.size() + 3) {
        throw ConfigError("max docID length " + std::to_string(config.max_len) + " leaves no room for clustering under [" +
                          prefix_to_string(semantic) + "]");
      }
      depth_budget = config.max_len - semantic.size() - 2;
    }
    std::vector<Vector> points;
    std::vector<double> member_scores;
    for (auto id : ids) {
      points.push_back(embeddings.at(id));
      member_scores.push_back(scores.at(id));
    }
    const auto top = kmeans(points, config.k, node_seed(config.seed, semantic));
    std::vector<std::vector<std::size_t>> clusters(config.k);
    for (std::size_t i = 0; i < ids.size(); ++i) clusters[top.assignments[i]].push_back(i);
    for (std::size_t c = 0; c < config.k; ++c) {
      if (clusters[c].empty()) continue;
      std::vector<Vector> sub_points;
      std::vector<double> sub_scores;
      std::vector<ItemId> sub_ids;
      for (auto i : clusters[c]) {
        sub_points.push_back(points[i]);
        sub_scores.push_back(member_scores[i]);
        sub_ids.push_back(ids[i]);
      }
      Prefix head = semantic;
      head.push_back(static_cast<TokenValue>(c));
      auto sub = hierarchical_cluster(sub_points, config.k, config.max_cluster_size, depth_budget,
                                      node_seed(config.seed, head), sub_scores, sub_ids);
      for (auto& w : sub.warnings) build.warnings.push_back("[" + prefix_to_string(head) + "] " + w);
      for (std::size_t j = 0; j < sub_ids.size(); ++j) {
        Prefix tokens = head;
        tokens.insert(tokens.end(), sub.tokens[j].begin(), sub.tokens[j].end());
        build.docids.emplace(sub_ids[j], DocId(std::move(tokens), semantic.size()));
      }
    }
  }
  build.node_scores = mean_scores_by_prefix(build.docids, scores);
  return build;
}

}  // namespace genret::docid
