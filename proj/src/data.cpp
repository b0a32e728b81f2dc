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

#include "genret/data.hpp"

#include "genret/error.hpp"

#include <algorithm>
#include <cctype>

namespace genret {

Catalog::Catalog(std::vector<Item> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].category_path.empty()) {
      throw DataError("item " + std::to_string(items_[i].id) + " has an empty category path");
    }
    if (!index_.emplace(items_[i].id, i).second) {
      throw DataError("duplicate item id " + std::to_string(items_[i].id));
    }
  }
}

std::optional<std::size_t> Catalog::index_of(ItemId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Item& Catalog::at(ItemId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw IndexError("unknown item id " + std::to_string(id));
  return items_[it->second];
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::click:
      return "click";
    case Behavior::pay:
      return "pay";
    case Behavior::view:
      return "view";
  }
  return "view";
}

Behavior parse_behavior(std::string_view name) {
  if (name == "click") return Behavior::click;
  if (name == "pay") return Behavior::pay;
  if (name == "view") return Behavior::view;
  throw DataError("unknown behavior tag '" + std::string(name) + "'");
}

std::int64_t token_bucket(std::string_view token, std::int64_t buckets) {
  return 1 + static_cast<std::int64_t>(fnv1a(token) % static_cast<std::uint64_t>(buckets - 1));
}

}  // namespace genret
