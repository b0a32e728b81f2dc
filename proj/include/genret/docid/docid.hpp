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

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace genret::docid {

using TokenValue = std::int32_t;

/// Token identity is (position, value); the same value at two positions is
/// two different tokens.
struct Token {
  std::size_t position = 0;
  TokenValue value = 0;
  auto operator<=>(const Token&) const = default;
};

/// Leading category tokens (the semantic layer) followed by cluster tokens
/// and a final ordinal.
class DocId {
 public:
  DocId() = default;
  DocId(std::vector<TokenValue> values, std::size_t semantic_len);

  std::span<const TokenValue> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::size_t semantic_len() const { return semantic_len_; }
  Token token(std::size_t position) const { return {position, values_.at(position)}; }
  TokenValue operator[](std::size_t position) const { return values_[position]; }

  /// Decimal values joined with '-', e.g. "2-202-3-7".
  std::string to_string() const;
  /// Throws DataError on malformed text.
  static DocId parse(std::string_view text, std::size_t semantic_len);

  bool operator==(const DocId& other) const { return values_ == other.values_; }
  auto operator<=>(const DocId& other) const { return values_ <=> other.values_; }

 private:
  std::vector<TokenValue> values_;
  std::size_t semantic_len_ = 0;
};

using Prefix = std::vector<TokenValue>;

/// Efficient score E for every node below the semantic layer, keyed by the
/// token values on the path from the root.
using NodeScores = std::map<Prefix, double>;

std::string prefix_to_string(std::span<const TokenValue> prefix);

}  // namespace genret::docid
