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
#include <span>
#include <string>
#include <vector>

namespace genret::pipeline {

enum class RowFormat { jsonl, tsv };

RowFormat parse_row_format(std::string_view name);

/// Rejected lines above this fraction of all non-empty lines abort loading.
inline constexpr double kMaxMalformedFraction = 0.01;

/// Page views group rows by (user, query, timestamp bucket).
inline constexpr std::int64_t kPageViewBucketSeconds = 600;

struct LoadedDataset {
  std::vector<DatasetRow> rows;
  std::size_t malformed = 0;
  std::vector<std::string> malformed_examples;  // "line N: reason", first few only
  std::vector<ItemId> unknown_items;            // targets missing from the catalog, rows dropped
  std::vector<PageView> page_views;
};

/// JSONL rows: {"user_id", "query", "context": [{"item_id", "behavior"}],
/// "target", "relevance", "click", "timestamp"}. TSV columns in the same
/// order, context as "id:behavior,id:behavior". Lines with bad syntax or
/// non-binary labels are counted as malformed; more than 1% of them throws
/// DataError. A missing file throws LoadError.
LoadedDataset load_dataset(const std::filesystem::path& path, RowFormat format, const Catalog& catalog);

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRow> rows,
                   RowFormat format = RowFormat::jsonl);

/// One page view per (user, query, timestamp / bucket) in first-seen
/// order; each row contributes its target with the click label.
std::vector<PageView> group_page_views(std::span<const DatasetRow> rows,
                                       std::int64_t bucket_seconds = kPageViewBucketSeconds);

/// JSONL {"item_id", "category_path", "title", "ctr", "click_count", "pay_count"}.
Catalog load_catalog(const std::filesystem::path& path);
void write_catalog(const std::filesystem::path& path, const Catalog& catalog);

}  // namespace genret::pipeline
