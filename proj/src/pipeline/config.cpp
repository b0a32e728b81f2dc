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

#include "genret/pipeline/config.hpp"

#include "genret/error.hpp"
#include "genret/nn/checkpoint.hpp"
#include "genret/pipeline/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace genret::pipeline {

nn::TrainLoopConfig StageTraining::loop(std::uint64_t seed) const {
  nn::TrainLoopConfig c;
  c.learning_rate = learning_rate;
  c.batch_size = batch_size;
  c.epochs = epochs;
  c.seed = seed;
  return c;
}

std::size_t EvalConfig::decode_k() const {
  return recall_ks.empty() ? 1 : *std::max_element(recall_ks.begin(), recall_ks.end());
}

namespace {

nlohmann::json training_json(const StageTraining& t) {
  return {{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size}, {"epochs", t.epochs}};
}

StageTraining training_from_json(const nlohmann::json& j, StageTraining t) {
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.epochs = j.value("epochs", t.epochs);
  return t;
}

void check_training(const StageTraining& t, const std::string& stage) {
  if (!(t.learning_rate > 0 && t.learning_rate <= 1)) throw ConfigError(stage + ".train.learning_rate must be in (0, 1]");
  if (t.batch_size == 0) throw ConfigError(stage + ".train.batch_size must be at least 1");
  if (t.epochs == 0 || t.epochs > 100000) throw ConfigError(stage + ".train.epochs must be in [1, 100000]");
}

// Merges `patch` into `base` key by key so partial files keep preset values.
void merge(nlohmann::json& base, const nlohmann::json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      merge(base[it.key()], *it);
    } else {
      base[it.key()] = *it;
    }
  }
}

std::string env_name(const std::vector<std::string>& path) {
  std::string out = kEnvPrefix;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '_';
    for (char c : path[i]) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

void override_leaves(nlohmann::json& node, std::vector<std::string>& path, const EnvLookup& env) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      path.push_back(it.key());
      override_leaves(*it, path, env);
      path.pop_back();
    }
    return;
  }
  const auto name = env_name(path);
  const auto value = env(name);
  if (!value) return;
  try {
    if (node.is_string()) {
      node = *value;
    } else {
      auto parsed = nlohmann::json::parse(*value);
      const bool ok = (node.is_boolean() && parsed.is_boolean()) ||
                      (node.is_number_unsigned() && parsed.is_number_unsigned()) ||
                      (node.is_number_integer() && !node.is_number_unsigned() && parsed.is_number_integer()) ||
                      (node.is_number_float() && parsed.is_number()) || (node.is_array() && parsed.is_array()) ||
                      node.is_null();
      if (!ok) throw ConfigError(name + "='" + *value + "' has the wrong type");
      node = parsed;
    }
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(name + "='" + *value + "' is not a valid value");
  }
}

}  // namespace

PipelineConfig PipelineConfig::large() {
  PipelineConfig c;
  c.preset = "large";
  c.embed.d_atomic = 256;
  c.embed.d_e = 256;
  c.embed.d_k = 64;
  c.embed.user_hidden = 512;
  c.embed.head_hidden = 512;
  c.embed.click_weight = 1.0;
  c.embed_train = {1e-4, 512, 10};
  c.metric.d_atomic = 256;
  c.metric.d = 256;
  c.metric.hidden = 512;
  c.metric.margin = 0.1;
  c.metric_train = {1e-5, 10, 10};
  c.docids.k = 10;
  c.docids.max_cluster_size = 100;
  c.docids.semantic_len = 1;
  c.decoder.d_hidden = 768;
  c.decoder.context_hidden = 768;
  c.decoder.d_context = 256;
  c.decoder.d_token = 64;
  c.decoder_train = {5e-5, 64, 10};
  c.decoder_loss = {};
  c.eval.beam_width = 20;
  return c;
}

PipelineConfig PipelineConfig::desk() {
  PipelineConfig c;
  c.preset = "desk";
  c.embed.d_k = 16;
  c.embed.d_u = 8;
  c.embed.d_e = 16;
  c.embed.d_atomic = 16;
  c.embed.user_hidden = 32;
  c.embed.head_hidden = 32;
  c.embed.token_buckets = 2048;
  c.embed.user_buckets = 256;
  c.embed_train = {3e-3, 64, 3};
  c.metric.d_atomic = 16;
  c.metric.d = 16;
  c.metric.hidden = 32;
  c.metric_train = {3e-3, 32, 3};
  c.docids.k = 4;
  c.docids.max_cluster_size = 8;
  c.docids.semantic_len = 0;
  c.decoder.d_k = 32;
  c.decoder.d_u = 8;
  c.decoder.context_hidden = 96;
  c.decoder.d_context = 64;
  c.decoder.d_token = 32;
  c.decoder.d_hidden = 128;
  c.decoder.token_buckets = 4096;
  c.decoder.user_buckets = 256;
  c.decoder_train = {5e-3, 32, 40};
  c.eval.beam_width = 20;
  return c;
}

PipelineConfig PipelineConfig::preset_named(std::string_view name) {
  if (name == "desk") return desk();
  if (name == "large") return large();
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk or large)");
}

void PipelineConfig::validate() const {
  if (work_dir.empty()) throw ConfigError("work_dir must not be empty");
  if (data.format != "jsonl" && data.format != "tsv") throw ConfigError("data.format must be jsonl or tsv");
  embed.validate();
  metric.validate();
  docids.validate();
  decoder.validate();
  decoder_loss.validate();
  check_training(embed_train, "embed");
  check_training(metric_train, "metric");
  check_training(decoder_train, "decoder");
  if (metric.d_atomic != embed.d_atomic) throw ConfigError("metric.model.d_atomic must equal embed.model.d_atomic");
  if (eval.recall_ks.empty()) throw ConfigError("eval.recall_ks must not be empty");
  for (auto k : eval.recall_ks) {
    if (k == 0) throw ConfigError("eval.recall_ks entries must be at least 1");
  }
  if (eval.beam_width < eval.decode_k()) throw ConfigError("eval.beam_width must be at least the largest recall k");
  if (!(eval.swing_alpha > 0)) throw ConfigError("eval.swing_alpha must be positive");
  if (eval.folds == 0) throw ConfigError("eval.folds must be at least 1");
  ExpansionVariant::parse(eval.variant);
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"preset", preset},
          {"seed", seed},
          {"work_dir", work_dir.string()},
          {"data",
           {{"catalog", data.catalog.string()},
            {"train", data.train.string()},
            {"test", data.test.string()},
            {"relevance", data.relevance.string()},
            {"format", data.format}}},
          {"embed", {{"model", embed.to_json()}, {"train", training_json(embed_train)}}},
          {"metric", {{"model", metric.to_json()}, {"train", training_json(metric_train)}}},
          {"docids", docids.to_json()},
          {"decoder",
           {{"model", decoder.to_json()}, {"train", training_json(decoder_train)}, {"loss", decoder_loss.to_json()}}},
          {"eval",
           {{"beam_width", eval.beam_width},
            {"recall_ks", eval.recall_ks},
            {"variant", eval.variant},
            {"i2i_per_seed", eval.i2i_per_seed},
            {"cap", eval.cap},
            {"swing_alpha", eval.swing_alpha},
            {"swing_top_n", eval.swing_top_n},
            {"folds", eval.folds}}},
          {"stages",
           {{"embed", stages.embed},
            {"metric", stages.metric},
            {"docids", stages.docids},
            {"decoder", stages.decoder},
            {"eval", stages.eval}}}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& patch) {
  if (!patch.is_object()) throw ConfigError("config must be a JSON object");
  const auto base = preset_named(patch.value("preset", std::string("desk")));
  auto j = base.to_json();
  merge(j, patch);
  try {
    PipelineConfig c = base;
    c.preset = j.at("preset").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.work_dir = j.at("work_dir").get<std::string>();
    const auto& d = j.at("data");
    c.data = {d.at("catalog").get<std::string>(), d.at("train").get<std::string>(), d.at("test").get<std::string>(),
              d.at("relevance").get<std::string>(), d.at("format").get<std::string>()};
    c.embed = repr::TwoTowerConfig::from_json(j.at("embed").at("model"));
    c.embed_train = training_from_json(j.at("embed").at("train"), c.embed_train);
    c.metric = metric::FusionConfig::from_json(j.at("metric").at("model"));
    c.metric_train = training_from_json(j.at("metric").at("train"), c.metric_train);
    c.docids = docid::DocIdBuildConfig::from_json(j.at("docids"));
    c.decoder = decoder::DecoderConfig::from_json(j.at("decoder").at("model"));
    c.decoder_train = training_from_json(j.at("decoder").at("train"), c.decoder_train);
    c.decoder_loss = decoder::PositionWeightConfig::from_json(j.at("decoder").at("loss"));
    const auto& e = j.at("eval");
    c.eval.beam_width = e.at("beam_width").get<std::size_t>();
    c.eval.recall_ks = e.at("recall_ks").get<std::vector<std::size_t>>();
    c.eval.variant = e.at("variant").get<std::string>();
    c.eval.i2i_per_seed = e.at("i2i_per_seed").get<std::size_t>();
    c.eval.cap = e.at("cap").get<std::size_t>();
    c.eval.swing_alpha = e.at("swing_alpha").get<double>();
    c.eval.swing_top_n = e.at("swing_top_n").get<std::size_t>();
    c.eval.folds = e.at("folds").get<std::size_t>();
    const auto& s = j.at("stages");
    c.stages = {s.at("embed").get<bool>(), s.at("metric").get<bool>(), s.at("docids").get<bool>(),
                s.at("decoder").get<bool>(), s.at("eval").get<bool>()};
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

std::string PipelineConfig::ablation_label() const {
  std::vector<std::string> removed;
  if (decoder_loss.mode == decoder::LossMode::plain) removed.emplace_back("w/o position-aware loss");
  if (!docids.category_guided) removed.emplace_back("w/o category-guided clustering");
  if (removed.empty()) return "full";
  std::string out = removed[0];
  for (std::size_t i = 1; i < removed.size(); ++i) out += ", " + removed[i];
  return out;
}

std::uint64_t PipelineConfig::stage_seed(std::string_view stage) const {
  return fnv1a(stage, 0xcbf29ce484222325ULL ^ seed);
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

void apply_env_overrides(nlohmann::json& j, const EnvLookup& env) {
  std::vector<std::string> path;
  override_leaves(j, path, env);
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                           const std::string& preset) {
  nlohmann::json patch = nlohmann::json::object();
  if (file) {
    try {
      patch = nn::read_json_file(*file);
    } catch (const LoadError& e) {
      throw ConfigError(e.what());
    }
  }
  if (!patch.contains("preset")) patch["preset"] = preset;
  if (const auto p = env(std::string(kEnvPrefix) + "PRESET")) patch["preset"] = *p;
  auto j = PipelineConfig::preset_named(patch.at("preset").get<std::string>()).to_json();
  merge(j, patch);
  apply_env_overrides(j, env);
  return PipelineConfig::from_json(j);
}

}  // namespace genret::pipeline
