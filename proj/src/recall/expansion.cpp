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

#include "genret/recall/expansion.hpp"

#include "genret/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace genret::recall {

std::string_view to_string(RecallTag tag) {
  switch (tag) {
    case RecallTag::direct:
      return "direct";
    case RecallTag::cluster:
      return "cluster";
    case RecallTag::i2i:
      return "i2i";
  }
  return "direct";
}

std::vector<ItemId> RecallSet::items() const {
  std::vector<ItemId> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.item);
  return out;
}

namespace {

bool by_score(const RecallEntry& a, const RecallEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

}  // namespace

RecallSet cluster_expand(std::span<const decoder::BeamResult> decoded, const docid::DocIdTrie& trie,
                         std::size_t prefix_len) {
  RecallSet out;
  std::unordered_set<ItemId> seen;
  for (const auto& d : decoded) {
    if (seen.insert(d.item).second) out.entries.push_back({d.item, RecallTag::direct, d.log_prob});
  }
  std::vector<RecallEntry> expanded;
  for (const auto& d : decoded) {
    if (prefix_len >= d.docid.size()) continue;
    const auto node = trie.find(d.docid.values().first(prefix_len));
    if (!node) continue;
    for (auto item : trie.items_under(*node)) {
      if (!seen.insert(item).second) continue;
      const auto leaf = trie.find(trie.docid_of(item).values());
      expanded.push_back({item, RecallTag::cluster, trie.node(*leaf).score.value_or(0.0)});
    }
  }
  std::sort(expanded.begin(), expanded.end(), by_score);
  out.entries.insert(out.entries.end(), expanded.begin(), expanded.end());
  return out;
}

I2ITable swing_scores(std::span<const UserItem> interactions, double alpha, std::size_t top_n) {
  if (!(alpha > 0)) throw ConfigError("swing alpha must be positive");
  std::map<std::string, std::set<ItemId>> by_user;
  for (const auto& r : interactions) by_user[r.user].insert(r.item);
  std::vector<std::vector<ItemId>> users;
  for (auto& [u, items] : by_user) {
    if (items.size() >= 2) users.emplace_back(items.begin(), items.end());
  }

  std::map<std::pair<ItemId, ItemId>, double> pair_scores;
  std::vector<ItemId> common;
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (std::size_t v = u + 1; v < users.size(); ++v) {
      common.clear();
      std::set_intersection(users[u].begin(), users[u].end(), users[v].begin(), users[v].end(),
                            std::back_inserter(common));
      if (common.size() < 2) continue;
      const double w = 1.0 / (alpha + static_cast<double>(common.size()));
      for (std::size_t a = 0; a < common.size(); ++a) {
        for (std::size_t b = a + 1; b < common.size(); ++b) pair_scores[{common[a], common[b]}] += w;
      }
    }
  }

  I2ITable table;
  for (const auto& [pair, s] : pair_scores) {
    table[pair.first].emplace_back(pair.second, s);
    table[pair.second].emplace_back(pair.first, s);
  }
  for (auto& [item, neighbors] : table) {
    std::sort(neighbors.begin(), neighbors.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (top_n > 0 && neighbors.size() > top_n) neighbors.resize(top_n);
  }
  return table;
}

RecallSet i2i_expand(std::span<const ItemId> seeds, const I2ITable& table, std::size_t per_seed_n) {
  std::map<ItemId, double> best;
  for (auto seed : seeds) {
    auto it = table.find(seed);
    if (it == table.end()) continue;
    const auto n = std::min(per_seed_n, it->second.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [neighbor, score] = it->second[i];
      auto [pos, inserted] = best.emplace(neighbor, score);
      if (!inserted) pos->second = std::max(pos->second, score);
    }
  }
  RecallSet out;
  for (const auto& [item, score] : best) out.entries.push_back({item, RecallTag::i2i, score});
  std::sort(out.entries.begin(), out.entries.end(), by_score);
  return out;
}

RecallSet merge_recall(const RecallSet& direct, const RecallSet& cluster, const RecallSet& i2i, std::size_t cap) {
  std::vector<RecallEntry> all;
  for (const auto* s : {&direct, &cluster, &i2i}) all.insert(all.end(), s->entries.begin(), s->entries.end());
  std::stable_sort(all.begin(), all.end(), [](const RecallEntry& a, const RecallEntry& b) {
    if (a.tag != b.tag) return a.tag < b.tag;
    return by_score(a, b);
  });
  RecallSet out;
  std::unordered_set<ItemId> seen;
  for (const auto& e : all) {
    if (out.entries.size() == cap) break;
    if (seen.insert(e.item).second) out.entries.push_back(e);
  }
  return out;
}

void write_i2i_table(const std::filesystem::path& path, const I2ITable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [item, neighbors] : table) {
    nlohmann::json n = nlohmann::json::array();
    for (const auto& [id, s] : neighbors) n.push_back({id, s});
    out << nlohmann::json{{"item_id", item}, {"neighbors", n}}.dump() << '\n';
  }
}

I2ITable read_i2i_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  I2ITable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto& list = table[j.at("item_id").get<ItemId>()];
      for (const auto& n : j.at("neighbors")) {
        const double s = n.at(1).get<double>();
        if (!(s >= 0)) throw LoadError(path.string() + ":" + std::to_string(lineno) + ": negative swing score");
        list.emplace_back(n.at(0).get<ItemId>(), s);
      }
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return table;
}

}  // namespace genret::recall
