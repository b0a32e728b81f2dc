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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace genret {

using ItemId = std::int64_t;
using CategoryId = std::int32_t;

/// Root-to-leaf category ids, e.g. clothing -> dress.
using CategoryPath = std::vector<CategoryId>;

/// Catalog record. `ctr` doubles as the item's efficient score.
struct Item {
  ItemId id = 0;
  CategoryPath category_path;
  std::string title;
  double ctr = 0.0;
  double click_count = 0.0;
  double pay_count = 0.0;

  double efficient_score() const { return ctr; }
  CategoryId leaf_category() const { return category_path.back(); }
};

/// Items sorted by id with O(1) lookup of their dense index.
class Catalog {
 public:
  Catalog() = default;
  /// Throws DataError on duplicate ids or empty category paths.
  explicit Catalog(std::vector<Item> items);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool contains(ItemId id) const { return index_.count(id) != 0; }
  std::optional<std::size_t> index_of(ItemId id) const;
  /// Throws IndexError for unknown ids.
  const Item& at(ItemId id) const;
  const Item& operator[](std::size_t index) const { return items_[index]; }
  std::span<const Item> items() const { return items_; }

 private:
  std::vector<Item> items_;
  std::unordered_map<ItemId, std::size_t> index_;
};

enum class Behavior { click, pay, view };

struct ContextEvent {
  ItemId item = 0;
  Behavior behavior = Behavior::click;
};

/// One logged impression: who searched what, the history they brought, and
/// how they reacted to the shown item.
struct DatasetRow {
  std::string user_id;
  std::string query;
  std::vector<ContextEvent> context;
  ItemId target = 0;
  int relevance = 0;
  int click = 0;
  std::int64_t timestamp = 0;
};

struct PageViewEntry {
  ItemId item = 0;
  int label = 0;
};

/// One exposure page: the ordered items shown and whether each was clicked.
struct PageView {
  std::string id;
  std::vector<PageViewEntry> entries;
};

/// Lower-cased whitespace tokens.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Hash bucket in [1, buckets); 0 is reserved for padding.
std::int64_t token_bucket(std::string_view token, std::int64_t buckets);

std::string_view to_string(Behavior b);
Behavior parse_behavior(std::string_view name);

}  // namespace genret
