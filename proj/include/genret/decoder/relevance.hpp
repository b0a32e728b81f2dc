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

#include <filesystem>
#include <map>
#include <utility>

namespace genret::decoder {

/// Symmetric category-similarity table. Unlisted distinct pairs score 0,
/// every category is fully similar to itself.
class RelevanceOracle {
 public:
  static constexpr double kThreshold = 0.5;

  /// Throws DataError for similarities outside [0, 1].
  void set(CategoryId a, CategoryId b, double similarity);
  double similarity(CategoryId a, CategoryId b) const;
  bool relevant(CategoryId a, CategoryId b) const { return similarity(a, b) >= kThreshold; }
  std::size_t size() const { return table_.size(); }

  /// JSONL {"a", "b", "similarity"}.
  static RelevanceOracle load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::pair<CategoryId, CategoryId>, double> table_;
};

}  // namespace genret::decoder
