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

#include "genret/decoder/model.hpp"
#include "genret/docid/builder.hpp"
#include "genret/metric/fusion.hpp"
#include "genret/nn/trainer.hpp"
#include "genret/repr/two_tower.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace genret::pipeline {

struct DataPaths {
  std::filesystem::path catalog;
  std::filesystem::path train;
  std::filesystem::path test;       // optional; empty disables zero-shot evaluation
  std::filesystem::path relevance;  // optional category-similarity table
  std::string format = "jsonl";
};

/// Learning rate, batch size and epochs of one training stage.
struct StageTraining {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;

  nn::TrainLoopConfig loop(std::uint64_t seed) const;
};

struct EvalConfig {
  std::size_t beam_width = 20;
  std::vector<std::size_t> recall_ks = {1, 5, 10};
  /// direct, cluster-K, i2i or cluster-K-i2i.
  std::string variant = "direct";
  std::size_t i2i_per_seed = 10;
  std::size_t cap = 5000;
  double swing_alpha = 1.0;
  std::size_t swing_top_n = 50;
  /// Above 1, also reports k-fold cross-validated Recall@k over held-in queries.
  std::size_t folds = 1;

  std::size_t decode_k() const;
};

struct StageToggles {
  bool embed = true;
  bool metric = true;
  bool docids = true;
  bool decoder = true;
  bool eval = true;
};

/// Every knob of an end-to-end run. Stage seeds derive from `seed`.
struct PipelineConfig {
  std::string preset = "desk";
  std::uint64_t seed = 1;
  std::filesystem::path work_dir = "work";
  DataPaths data;

  repr::TwoTowerConfig embed;
  StageTraining embed_train;
  metric::FusionConfig metric;
  StageTraining metric_train;
  docid::DocIdBuildConfig docids;
  decoder::DecoderConfig decoder;
  StageTraining decoder_train;
  decoder::PositionWeightConfig decoder_loss;
  EvalConfig eval;
  StageToggles stages;

  /// Full-scale dimensions and schedules; needs far more compute than desk.
  static PipelineConfig large();
  /// Small dimensions and faster schedules for a single CPU core.
  static PipelineConfig desk();
  static PipelineConfig preset_named(std::string_view name);

  /// Range-checks every field; throws ConfigError naming the first bad one.
  void validate() const;
  nlohmann::json to_json() const;
  /// Overlays `j` on the preset named by j["preset"] (default desk).
  static PipelineConfig from_json(const nlohmann::json& j);

  /// "full", or the removed component(s) for ablation runs.
  std::string ablation_label() const;

  std::uint64_t stage_seed(std::string_view stage) const;
};

/// Looks up environment variables; injectable for tests.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

inline constexpr const char* kEnvPrefix = "HIGEN_";

/// Applies HIGEN_<PATH> overrides to every scalar leaf of `j`, where PATH is
/// the upper-cased key path joined by '_' (e.g. HIGEN_EMBED_TRAIN_EPOCHS).
/// Values are parsed as the leaf's JSON type; bad values throw ConfigError.
void apply_env_overrides(nlohmann::json& j, const EnvLookup& env);

/// Preset, then config file (if any), then environment, then validation.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                           const std::string& preset = "desk");

}  // namespace genret::pipeline
