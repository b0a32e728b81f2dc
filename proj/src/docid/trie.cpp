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

#include "genret/docid/trie.hpp"

#include "genret/error.hpp"
#include "genret/nn/checkpoint.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace genret::docid {

DocIdTrie DocIdTrie::build(const std::map<ItemId, DocId>& docids, const NodeScores& scores) {
  DocIdTrie trie;
  trie.docids_ = docids;
  trie.scores_ = scores;
  trie.nodes_.emplace_back();
  for (const auto& [item, doc] : docids) {
    if (doc.empty()) throw DataError("item " + std::to_string(item) + " has an empty docID");
    NodeId cur = kRoot;
    for (std::size_t t = 0; t < doc.size(); ++t) {
      if (trie.nodes_[cur].item) {
        throw DataError("docID " + doc.to_string() + " extends the docID of item " +
                        std::to_string(*trie.nodes_[cur].item));
      }
      auto it = trie.nodes_[cur].children.find(doc[t]);
      if (it == trie.nodes_[cur].children.end()) {
        Node n;
        n.value = doc[t];
        n.depth = t + 1;
        n.parent = cur;
        const auto id = static_cast<NodeId>(trie.nodes_.size());
        trie.nodes_.push_back(std::move(n));
        trie.nodes_[cur].children.emplace(doc[t], id);
        cur = id;
      } else {
        cur = it->second;
      }
      ++trie.nodes_[cur].leaf_count;
      if (t + 1 > doc.semantic_len()) {
        auto s = scores.find(Prefix(doc.values().begin(), doc.values().begin() + static_cast<std::ptrdiff_t>(t + 1)));
        if (s == scores.end() || !std::isfinite(s->second)) {
          throw DataError("no efficient score for node " + prefix_to_string(doc.values().first(t + 1)));
        }
        trie.nodes_[cur].score = s->second;
      }
    }
    if (trie.nodes_[cur].item) {
      throw DataError("duplicate docID " + doc.to_string() + " for items " + std::to_string(*trie.nodes_[cur].item) +
                      " and " + std::to_string(item));
    }
    if (!trie.nodes_[cur].children.empty()) {
      throw DataError("docID " + doc.to_string() + " is a prefix of another docID");
    }
    trie.nodes_[cur].item = item;
    ++trie.nodes_[kRoot].leaf_count;
    trie.max_length_ = std::max(trie.max_length_, doc.size());
  }
  return trie;
}

std::optional<DocIdTrie::NodeId> DocIdTrie::child(NodeId id, TokenValue value) const {
  const auto& ch = nodes_.at(id).children;
  auto it = ch.find(value);
  if (it == ch.end()) return std::nullopt;
  return it->second;
}

std::optional<DocIdTrie::NodeId> DocIdTrie::find(std::span<const TokenValue> prefix) const {
  if (nodes_.empty()) return std::nullopt;
  NodeId cur = kRoot;
  for (auto v : prefix) {
    auto next = child(cur, v);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

Prefix DocIdTrie::path(NodeId id) const {
  Prefix out(nodes_.at(id).depth);
  for (NodeId cur = id; cur != kRoot; cur = nodes_[cur].parent) out[nodes_[cur].depth - 1] = nodes_[cur].value;
  return out;
}

std::optional<ItemId> DocIdTrie::lookup(const DocId& docid) const {
  auto n = find(docid.values());
  if (!n) return std::nullopt;
  return nodes_[*n].item;
}

const DocId& DocIdTrie::docid_of(ItemId item) const {
  auto it = docids_.find(item);
  if (it == docids_.end()) throw IndexError("no docID for item " + std::to_string(item));
  return it->second;
}

double DocIdTrie::score(NodeId id) const {
  const auto& n = nodes_.at(id);
  if (!n.score) throw IndexError("node " + prefix_to_string(path(id)) + " has no efficient score");
  return *n.score;
}

std::vector<ItemId> DocIdTrie::items_under(NodeId id) const {
  std::vector<ItemId> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    if (nodes_[cur].item) out.push_back(*nodes_[cur].item);
    const auto& ch = nodes_[cur].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(it->second);
  }
  return out;
}

std::vector<std::pair<DocId, ItemId>> DocIdTrie::enumerate() const {
  std::vector<std::pair<DocId, ItemId>> out;
  if (nodes_.empty()) return out;
  for (ItemId item : items_under(kRoot)) out.emplace_back(docids_.at(item), item);
  return out;
}

std::vector<std::vector<TokenValue>> DocIdTrie::position_values() const {
  std::vector<std::vector<TokenValue>> out(max_length_);
  for (std::size_t i = 1; i < nodes_.size(); ++i) out[nodes_[i].depth - 1].push_back(nodes_[i].value);
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

namespace {
constexpr const char* kIndexFormat = "genret-index";
}

void save_index(const std::filesystem::path& path, const DocIdTrie& trie) {
  nlohmann::json doc;
  doc["format"] = kIndexFormat;
  doc["version"] = kIndexVersion;
  auto& entries = doc["docids"] = nlohmann::json::array();
  for (const auto& [item, id] : trie.docids()) {
    entries.push_back({{"item_id", item}, {"docid", id.to_string()}, {"semantic_len", id.semantic_len()}});
  }
  auto& scores = doc["node_scores"] = nlohmann::json::array();
  for (const auto& [prefix, e] : trie.node_scores()) scores.push_back({prefix_to_string(prefix), e});
  std::ofstream out(path);
  if (!out) throw Error("cannot write index " + path.string());
  out << doc.dump();
}

DocIdTrie load_index(const std::filesystem::path& path) {
  const auto doc = nn::read_json_file(path);
  try {
    if (!doc.is_object() || doc.value("format", "") != kIndexFormat) throw LoadError(path.string() + ": not an index file");
    const int version = doc.at("version").get<int>();
    if (version > kIndexVersion) {
      throw LoadError(path.string() + ": index version " + std::to_string(version) + " is newer than supported " +
                      std::to_string(kIndexVersion));
    }
    std::map<ItemId, DocId> docids;
    for (const auto& e : doc.at("docids")) {
      docids.emplace(e.at("item_id").get<ItemId>(),
                     DocId::parse(e.at("docid").get<std::string>(), e.at("semantic_len").get<std::size_t>()));
    }
    NodeScores scores;
    for (const auto& s : doc.at("node_scores")) {
      const auto id = DocId::parse(s.at(0).get<std::string>(), 0);
      scores.emplace(Prefix(id.values().begin(), id.values().end()), s.at(1).get<double>());
    }
    return DocIdTrie::build(docids, scores);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  } catch (const LoadError&) {
    throw;
  } catch (const DataError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

}  // namespace genret::docid
