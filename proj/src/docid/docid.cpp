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

#include "genret/docid/docid.hpp"

#include "genret/error.hpp"

#include <charconv>

namespace genret::docid {

DocId::DocId(std::vector<TokenValue> values, std::size_t semantic_len)
    : values_(std::move(values)), semantic_len_(semantic_len) {
  if (semantic_len_ > values_.size()) throw DataError("docID semantic length exceeds its token count");
}

std::string prefix_to_string(std::span<const TokenValue> prefix) {
  std::string out;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i) out.push_back('-');
    out += std::to_string(prefix[i]);
  }
  return out;
}

std::string DocId::to_string() const { return prefix_to_string(values_); }

DocId DocId::parse(std::string_view text, std::size_t semantic_len) {
  std::vector<TokenValue> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t dash = text.find('-', start);
    const std::string_view part = text.substr(start, dash == std::string_view::npos ? dash : dash - start);
    TokenValue v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw DataError("malformed docID '" + std::string(text) + "'");
    }
    values.push_back(v);
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  return DocId(std::move(values), semantic_len);
}

}  // namespace genret::docid
