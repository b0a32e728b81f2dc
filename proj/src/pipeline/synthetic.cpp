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

#include "genret/pipeline/synthetic.hpp"

#include "genret/error.hpp"
#include "genret/nn/tensor.hpp"
#include "genret/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genret::pipeline {

void SyntheticConfig::validate() const {
  if (parents == 0 || leaves_per_parent == 0 || styles_per_leaf == 0) {
    throw ConfigError("synthetic: parents, leaves_per_parent and styles_per_leaf must be positive");
  }
  const auto leaves = parents * leaves_per_parent;
  if (items < 2 * leaves) throw ConfigError("synthetic: need at least two items per leaf category");
  if (train_queries == 0 || train_queries > items) throw ConfigError("synthetic: train_queries must be in [1, items]");
  if (impressions_per_query == 0 || users == 0) throw ConfigError("synthetic: impressions and users must be positive");
  if (page_size < 2) throw ConfigError("synthetic: page_size must be at least 2");
  if (!(test_overlap >= 0 && test_overlap <= 1)) throw ConfigError("synthetic: test_overlap must be in [0, 1]");
  const auto overlap = static_cast<std::size_t>(std::llround(test_overlap * static_cast<double>(test_queries)));
  if (overlap > train_queries || test_queries - overlap > items - train_queries) {
    throw ConfigError("synthetic: not enough distinct items for the requested test split");
  }
  if (!(sibling_similarity >= 0 && sibling_similarity <= 1)) {
    throw ConfigError("synthetic: sibling_similarity must be in [0, 1]");
  }
}

namespace {

constexpr ItemId kFirstItem = 1000;
constexpr std::int64_t kImpressionSpacing = 3600;

CategoryId parent_id(std::size_t p) { return static_cast<CategoryId>(p + 1); }
CategoryId leaf_id(std::size_t p, std::size_t l) { return static_cast<CategoryId>((p + 1) * 100 + l + 1); }

std::string query_text(const Item& item) {
  return "c" + std::to_string(item.leaf_category()) + " u" + std::to_string(item.id);
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  nn::Rng rng(config.seed);
  const auto leaves = config.parents * config.leaves_per_parent;

  std::vector<Item> items;
  std::vector<std::vector<std::size_t>> by_leaf(leaves);
  std::vector<std::vector<std::size_t>> by_parent(config.parents);
  std::vector<std::size_t> leaf_of(config.items);
  for (std::size_t i = 0; i < config.items; ++i) {
    const auto leaf = i * leaves / config.items;
    const auto p = leaf / config.leaves_per_parent;
    const auto l = leaf % config.leaves_per_parent;
    const auto style = by_leaf[leaf].size() % config.styles_per_leaf;
    Item it;
    it.id = kFirstItem + static_cast<ItemId>(i);
    it.category_path = {parent_id(p), leaf_id(p, l)};
    it.title = "p" + std::to_string(parent_id(p)) + " c" + std::to_string(leaf_id(p, l)) + " s" +
               std::to_string(leaf_id(p, l)) + "x" + std::to_string(style) + " u" + std::to_string(it.id);
    const double base = 0.02 + 0.06 * static_cast<double>(style) / static_cast<double>(config.styles_per_leaf);
    it.ctr = base + 0.01 * nn::uniform01(rng);
    it.click_count = std::round(it.ctr * 1000.0);
    it.pay_count = std::round(it.click_count / 10.0);
    by_leaf[leaf].push_back(i);
    leaf_of[i] = leaf;
    by_parent[p].push_back(i);
    items.push_back(std::move(it));
  }

  // Training targets: an even share of every leaf, order shuffled.
  std::vector<std::size_t> order;
  for (std::size_t round = 0; order.size() < config.items; ++round) {
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
      if (round < by_leaf[leaf].size()) order.push_back(by_leaf[leaf][round]);
    }
  }
  std::vector<std::size_t> targets(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.train_queries));
  nn::shuffle(targets.begin(), targets.end(), rng);
  std::vector<std::size_t> unused(order.begin() + static_cast<std::ptrdiff_t>(config.train_queries), order.end());

  SyntheticCorpus corpus;
  auto pick_user = [&] { return "user" + std::to_string(nn::uniform_index(rng, config.users)); };
  auto context_for = [&](std::size_t target) {
    std::vector<ContextEvent> ctx;
    const auto& pool = by_parent[static_cast<std::size_t>(items[target].category_path[0] - 1)];
    for (std::size_t c = 0; c < config.context_len; ++c) {
      ctx.push_back({items[pool[nn::uniform_index(rng, pool.size())]].id, Behavior::click});
    }
    return ctx;
  };

  std::int64_t clock = 0;
  for (auto target : targets) {
    const auto& item = items[target];
    const auto leaf = leaf_of[target];
    for (std::size_t m = 0; m < config.impressions_per_query; ++m) {
      clock += kImpressionSpacing;
      DatasetRow base;
      base.user_id = pick_user();
      base.query = query_text(item);
      base.context = context_for(target);
      base.timestamp = clock;

      std::vector<std::size_t> page{target};
      std::vector<std::size_t> siblings;
      for (auto s : by_leaf[leaf]) {
        if (s != target) siblings.push_back(s);
      }
      nn::shuffle(siblings.begin(), siblings.end(), rng);
      for (auto s : siblings) {
        if (page.size() + 1 >= config.page_size) break;
        page.push_back(s);
      }
      std::size_t other = nn::uniform_index(rng, config.items);
      while (items[other].leaf_category() == item.leaf_category()) other = nn::uniform_index(rng, config.items);
      page.push_back(other);

      for (std::size_t j = 0; j < page.size(); ++j) {
        DatasetRow r = base;
        r.target = items[page[j]].id;
        r.click = page[j] == target ? 1 : 0;
        r.relevance = items[page[j]].leaf_category() == item.leaf_category() ? 1 : 0;
        r.timestamp = base.timestamp + static_cast<std::int64_t>(j);
        corpus.train.push_back(std::move(r));
      }
    }
  }

  const auto overlap = static_cast<std::size_t>(std::llround(config.test_overlap * static_cast<double>(config.test_queries)));
  std::vector<std::size_t> reused = targets;
  nn::shuffle(reused.begin(), reused.end(), rng);
  nn::shuffle(unused.begin(), unused.end(), rng);
  for (std::size_t q = 0; q < config.test_queries; ++q) {
    const auto target = q < overlap ? reused[q] : unused[q - overlap];
    clock += kImpressionSpacing;
    DatasetRow r;
    r.user_id = pick_user();
    r.query = query_text(items[target]);
    r.context = context_for(target);
    r.target = items[target].id;
    r.relevance = 1;
    r.click = 1;
    r.timestamp = clock;
    corpus.test.push_back(std::move(r));
  }

  for (std::size_t p = 0; p < config.parents; ++p) {
    for (std::size_t a = 0; a < config.leaves_per_parent; ++a) {
      for (std::size_t b = a + 1; b < config.leaves_per_parent; ++b) {
        corpus.relevance.set(leaf_id(p, a), leaf_id(p, b), config.sibling_similarity);
      }
    }
  }
  corpus.catalog = Catalog(std::move(items));
  return corpus;
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir);
  write_catalog(dir / "catalog.jsonl", corpus.catalog);
  write_dataset(dir / "train.jsonl", corpus.train);
  write_dataset(dir / "test.jsonl", corpus.test);
  corpus.relevance.save(dir / "relevance.jsonl");
}

}  // namespace genret::pipeline
