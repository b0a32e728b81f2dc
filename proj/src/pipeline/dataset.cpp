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

#include "genret/pipeline/dataset.hpp"

#include "genret/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

namespace genret::pipeline {

namespace {

constexpr std::size_t kMaxReportedMalformed = 5;

int binary_label(const nlohmann::json& v, const char* name) {
  const auto x = v.get<int>();
  if (x != 0 && x != 1) throw DataError(std::string(name) + " label must be 0 or 1");
  return x;
}

template <typename T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw DataError(std::string("bad ") + what + " '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

DatasetRow parse_jsonl_row(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  DatasetRow r;
  r.user_id = j.at("user_id").get<std::string>();
  r.query = j.at("query").get<std::string>();
  for (const auto& c : j.value("context", nlohmann::json::array())) {
    r.context.push_back({c.at("item_id").get<ItemId>(), parse_behavior(c.value("behavior", std::string("click")))});
  }
  r.target = j.at("target").get<ItemId>();
  r.relevance = binary_label(j.at("relevance"), "relevance");
  r.click = binary_label(j.at("click"), "click");
  r.timestamp = j.value("timestamp", std::int64_t{0});
  return r;
}

DatasetRow parse_tsv_row(const std::string& line) {
  const auto cols = split(line, '\t');
  if (cols.size() != 7) throw DataError("expected 7 tab-separated columns, got " + std::to_string(cols.size()));
  DatasetRow r;
  r.user_id = std::string(cols[0]);
  r.query = std::string(cols[1]);
  if (!cols[2].empty()) {
    for (auto ev : split(cols[2], ',')) {
      const auto colon = ev.find(':');
      const auto id = ev.substr(0, colon);
      r.context.push_back({parse_number<ItemId>(id, "context item"),
                           colon == std::string_view::npos ? Behavior::click : parse_behavior(ev.substr(colon + 1))});
    }
  }
  r.target = parse_number<ItemId>(cols[3], "target");
  r.relevance = parse_number<int>(cols[4], "relevance");
  r.click = parse_number<int>(cols[5], "click");
  if (r.relevance != 0 && r.relevance != 1) throw DataError("relevance label must be 0 or 1");
  if (r.click != 0 && r.click != 1) throw DataError("click label must be 0 or 1");
  r.timestamp = parse_number<std::int64_t>(cols[6], "timestamp");
  return r;
}

}  // namespace

RowFormat parse_row_format(std::string_view name) {
  if (name == "jsonl") return RowFormat::jsonl;
  if (name == "tsv") return RowFormat::tsv;
  throw ConfigError("unknown row format '" + std::string(name) + "' (expected jsonl or tsv)");
}

LoadedDataset load_dataset(const std::filesystem::path& path, RowFormat format, const Catalog& catalog) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open dataset " + path.string());
  LoadedDataset out;
  std::set<ItemId> unknown;
  std::string line;
  std::size_t lineno = 0, lines = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++lines;
    try {
      auto row = format == RowFormat::jsonl ? parse_jsonl_row(line) : parse_tsv_row(line);
      if (!catalog.contains(row.target)) {
        unknown.insert(row.target);
        continue;
      }
      out.rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      ++out.malformed;
      if (out.malformed_examples.size() < kMaxReportedMalformed) {
        out.malformed_examples.push_back("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  if (lines > 0 && static_cast<double>(out.malformed) > kMaxMalformedFraction * static_cast<double>(lines)) {
    std::string msg = path.string() + ": " + std::to_string(out.malformed) + " of " + std::to_string(lines) +
                      " lines are malformed";
    for (const auto& ex : out.malformed_examples) msg += "\n  " + ex;
    throw DataError(msg);
  }
  out.unknown_items.assign(unknown.begin(), unknown.end());
  out.page_views = group_page_views(out.rows);
  return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRow> rows, RowFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : rows) {
    if (format == RowFormat::jsonl) {
      nlohmann::json ctx = nlohmann::json::array();
      for (const auto& c : r.context) ctx.push_back({{"item_id", c.item}, {"behavior", to_string(c.behavior)}});
      out << nlohmann::json{{"user_id", r.user_id},     {"query", r.query},         {"context", ctx},
                            {"target", r.target},       {"relevance", r.relevance}, {"click", r.click},
                            {"timestamp", r.timestamp}}
                 .dump()
          << '\n';
    } else {
      out << r.user_id << '\t' << r.query << '\t';
      for (std::size_t i = 0; i < r.context.size(); ++i) {
        out << (i ? "," : "") << r.context[i].item << ':' << to_string(r.context[i].behavior);
      }
      out << '\t' << r.target << '\t' << r.relevance << '\t' << r.click << '\t' << r.timestamp << '\n';
    }
  }
}

std::vector<PageView> group_page_views(std::span<const DatasetRow> rows, std::int64_t bucket_seconds) {
  if (bucket_seconds <= 0) throw ConfigError("page-view bucket must be positive");
  using Key = std::tuple<std::string, std::string, std::int64_t>;
  std::map<Key, std::size_t> index;
  std::vector<PageView> out;
  for (const auto& r : rows) {
    // Floor division keeps negative timestamps in consistent buckets.
    std::int64_t bucket = r.timestamp / bucket_seconds;
    if (r.timestamp < 0 && r.timestamp % bucket_seconds != 0) --bucket;
    Key key{r.user_id, r.query, bucket};
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) out.push_back({r.user_id + "|" + r.query + "|" + std::to_string(bucket), {}});
    out[it->second].entries.push_back({r.target, r.click});
  }
  return out;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open catalog " + path.string());
  std::vector<Item> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Item it;
      it.id = j.at("item_id").get<ItemId>();
      it.category_path = j.at("category_path").get<CategoryPath>();
      it.title = j.value("title", std::string());
      it.ctr = j.value("ctr", 0.0);
      it.click_count = j.value("click_count", 0.0);
      it.pay_count = j.value("pay_count", 0.0);
      items.push_back(std::move(it));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return Catalog(std::move(items));
}

void write_catalog(const std::filesystem::path& path, const Catalog& catalog) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& it : catalog.items()) {
    out << nlohmann::json{{"item_id", it.id}, {"category_path", it.category_path}, {"title", it.title},
                          {"ctr", it.ctr},    {"click_count", it.click_count},     {"pay_count", it.pay_count}}
               .dump()
        << '\n';
  }
}

}  // namespace genret::pipeline
