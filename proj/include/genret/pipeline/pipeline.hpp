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

#include "genret/decoder/beam_search.hpp"
#include "genret/decoder/model.hpp"
#include "genret/pipeline/config.hpp"
#include "genret/recall/expansion.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genret::pipeline {

enum class Stage { embed, metric, docids, decoder, eval };
inline constexpr std::array<Stage, 5> kAllStages = {Stage::embed, Stage::metric, Stage::docids, Stage::decoder,
                                                    Stage::eval};

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view name);

struct StageRecord {
  Stage stage = Stage::embed;
  bool skipped = false;
  double seconds = 0.0;
  std::vector<std::string> notes;
};

/// Serving variant: decoded items, optionally widened by shared-prefix
/// cluster expansion and/or I2I triggers.
struct ExpansionVariant {
  std::optional<std::size_t> cluster_prefix;
  bool i2i = false;

  /// "direct", "cluster-K", "i2i" or "cluster-K-i2i"; throws ConfigError otherwise.
  static ExpansionVariant parse(std::string_view name);
  std::string to_string() const;
};

recall::RecallSet expand(std::span<const decoder::BeamResult> decoded, const docid::DocIdTrie& trie,
                         const recall::I2ITable& i2i, const ExpansionVariant& variant, std::size_t i2i_per_seed,
                         std::size_t cap);

struct EvalReport {
  std::string ablation;
  std::string preset;
  std::uint64_t seed = 0;
  std::size_t queries = 0;
  std::map<std::size_t, double> recall;  // held-in Recall@k
  std::size_t zero_shot_queries = 0;
  double zero_shot_removed_fraction = 0.0;
  std::map<std::size_t, double> zero_shot_recall;
  std::string variant;
  double recall_num = 0.0;         // mean RecallNum of the serving variant
  double expansion_recall = 0.0;   // share of held-in queries whose truth is in the recall set
  std::vector<double> token_accuracy;  // last decoder epoch, per position
  std::size_t cv_folds = 0;            // 0 when cross-validation is off
  std::map<std::size_t, double> cv_recall;
  std::map<std::string, double> timings;
  nlohmann::json config;

  /// Everything except timings; identical across reruns with equal seeds.
  nlohmann::json metrics_json() const;
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string to_text() const;
};

/// Reads JSONL decode requests {"user_id", "query", "context": [item ids]}.
std::vector<decoder::DecodeInput> read_decode_inputs(const std::filesystem::path& path);
/// One JSONL line {"query", "results": [{"docid", "item_id", "logprob"}]}.
void write_decode_result(std::ostream& out, const std::string& query, std::span<const decoder::BeamResult> results);

/// Hex FNV-1a of a file's bytes; "" for an empty path. Throws LoadError when unreadable.
std::string hash_file(const std::filesystem::path& path);

/// Stage sequencing embed -> metric -> docids -> decoder -> eval over a work
/// directory. Each stage records the hash of its inputs (stage config plus
/// upstream artifacts) and of its outputs in manifest.json, and is skipped
/// when both still match.
class Pipeline {
 public:
  using StageCallback = std::function<void(const StageRecord&)>;

  explicit Pipeline(PipelineConfig config, StageCallback on_stage = {});

  const PipelineConfig& config() const { return config_; }
  std::filesystem::path artifact(Stage stage, std::string_view name) const;

  /// Runs `stages` in order. Exceptions propagate after earlier stages have
  /// been recorded in the manifest.
  std::vector<StageRecord> run(std::span<const Stage> stages);
  /// Every stage enabled in the config toggles.
  std::vector<StageRecord> run_all();

  /// Reads the report written by the eval stage.
  EvalReport report() const;

 private:
  struct Data;
  const Data& data();
  std::string input_hash(Stage stage) const;
  StageRecord run_stage(Stage stage);
  std::vector<std::string> execute(Stage stage);
  std::vector<std::filesystem::path> outputs(Stage stage) const;
  nlohmann::json stage_config(Stage stage) const;

  void run_embed();
  void run_metric();
  std::vector<std::string> run_docids();
  void run_decoder();
  void run_eval();

  PipelineConfig config_;
  StageCallback on_stage_;
  std::shared_ptr<Data> data_;
};

}  // namespace genret::pipeline
