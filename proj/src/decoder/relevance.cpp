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

#include "genret/decoder/relevance.hpp"

#include "genret/error.hpp"

#include <json.hpp>

#include <fstream>

namespace genret::decoder {

void RelevanceOracle::set(CategoryId a, CategoryId b, double similarity) {
  if (!(similarity >= 0.0 && similarity <= 1.0)) {
    throw DataError("category similarity must be in [0, 1], got " + std::to_string(similarity));
  }
  if (a == b) return;
  table_[{std::min(a, b), std::max(a, b)}] = similarity;
}

double RelevanceOracle::similarity(CategoryId a, CategoryId b) const {
  if (a == b) return 1.0;
  auto it = table_.find({std::min(a, b), std::max(a, b)});
  return it == table_.end() ? 0.0 : it->second;
}

RelevanceOracle RelevanceOracle::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  RelevanceOracle oracle;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      oracle.set(j.at("a").get<CategoryId>(), j.at("b").get<CategoryId>(), j.at("similarity").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return oracle;
}

void RelevanceOracle::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [key, s] : table_) out << nlohmann::json{{"a", key.first}, {"b", key.second}, {"similarity", s}}.dump() << '\n';
}

}  // namespace genret::decoder
