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

#include "genret/pipeline/pipeline.hpp"

#include "genret/error.hpp"
#include "genret/nn/checkpoint.hpp"
#include "genret/pipeline/dataset.hpp"
#include "genret/pipeline/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

namespace genret::pipeline {

namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::embed:
      return "embed";
    case Stage::metric:
      return "metric";
    case Stage::docids:
      return "docids";
    case Stage::decoder:
      return "decoder";
    case Stage::eval:
      return "eval";
  }
  return "embed";
}

Stage parse_stage(std::string_view name) {
  for (auto s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

ExpansionVariant ExpansionVariant::parse(std::string_view name) {
  ExpansionVariant v;
  if (name == "direct") return v;
  if (name == "i2i") {
    v.i2i = true;
    return v;
  }
  constexpr std::string_view kCluster = "cluster-";
  if (name.substr(0, kCluster.size()) == kCluster) {
    auto rest = name.substr(kCluster.size());
    constexpr std::string_view kI2I = "-i2i";
    if (rest.size() > kI2I.size() && rest.substr(rest.size() - kI2I.size()) == kI2I) {
      v.i2i = true;
      rest = rest.substr(0, rest.size() - kI2I.size());
    }
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    if (ec == std::errc() && ptr == rest.data() + rest.size() && k >= 1) {
      v.cluster_prefix = k;
      return v;
    }
  }
  throw ConfigError("unknown expansion variant '" + std::string(name) +
                    "' (expected direct, cluster-K, i2i or cluster-K-i2i)");
}

std::string ExpansionVariant::to_string() const {
  if (!cluster_prefix) return i2i ? "i2i" : "direct";
  return "cluster-" + std::to_string(*cluster_prefix) + (i2i ? "-i2i" : "");
}

recall::RecallSet expand(std::span<const decoder::BeamResult> decoded, const docid::DocIdTrie& trie,
                         const recall::I2ITable& i2i, const ExpansionVariant& variant, std::size_t i2i_per_seed,
                         std::size_t cap) {
  recall::RecallSet direct;
  for (const auto& d : decoded) direct.entries.push_back({d.item, recall::RecallTag::direct, d.log_prob});
  recall::RecallSet cluster;
  if (variant.cluster_prefix) cluster = recall::cluster_expand(decoded, trie, *variant.cluster_prefix);
  recall::RecallSet triggered;
  if (variant.i2i) {
    const auto seeds = direct.items();
    triggered = recall::i2i_expand(seeds, i2i, i2i_per_seed);
  }
  return recall::merge_recall(direct, cluster, triggered, cap);
}

namespace {

nlohmann::json recall_map_json(const std::map<std::size_t, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

std::map<std::size_t, double> recall_map_from_json(const nlohmann::json& j) {
  std::map<std::size_t, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[std::stoul(it.key())] = it->get<double>();
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string hash_or_missing(const fs::path& path) {
  if (path.empty()) return "";
  if (!fs::exists(path)) return "missing";
  return hash_file(path);
}

// Held-in or zero-shot evaluation queries: clicked rows grouped by query text.
struct EvalQuery {
  decoder::DecodeInput input;
  std::vector<ItemId> truth;
};

std::vector<EvalQuery> eval_queries(std::span<const DatasetRow> rows) {
  std::map<std::string, std::size_t> index;
  std::vector<EvalQuery> out;
  for (const auto& r : rows) {
    if (r.click != 1) continue;
    auto [it, inserted] = index.emplace(r.query, out.size());
    if (inserted) {
      decoder::DecodeInput in{r.user_id, r.query, {}};
      for (const auto& c : r.context) in.context.push_back(c.item);
      out.push_back({std::move(in), {}});
    }
    auto& truth = out[it->second].truth;
    if (std::find(truth.begin(), truth.end(), r.target) == truth.end()) truth.push_back(r.target);
  }
  return out;
}

std::vector<std::vector<decoder::BeamResult>> decode_all(const decoder::DecoderModel& model,
                                                         const docid::DocIdTrie& trie,
                                                         std::span<const EvalQuery> queries, std::size_t beam,
                                                         std::size_t k) {
  std::vector<std::vector<decoder::BeamResult>> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const decoder::BoundDecoder scorer(model, model.encode(q.input));
    out.push_back(decoder::constrained_beam_search(scorer, trie, beam, std::min(k, trie.size())));
  }
  return out;
}

std::map<std::size_t, double> recall_table(const std::vector<std::vector<decoder::BeamResult>>& decoded,
                                           std::span<const EvalQuery> queries, std::span<const std::size_t> ks) {
  std::vector<std::vector<ItemId>> ranked, truth;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::vector<ItemId> items;
    for (const auto& r : decoded[q]) items.push_back(r.item);
    ranked.push_back(std::move(items));
    truth.push_back(queries[q].truth);
  }
  std::map<std::size_t, double> out;
  for (auto k : ks) out[k] = queries.empty() ? 0.0 : recall_at_k(ranked, truth, k);
  return out;
}

std::vector<recall::UserItem> swing_interactions(std::span<const DatasetRow> rows) {
  std::vector<recall::UserItem> out;
  for (const auto& r : rows) {
    if (r.click != 1) continue;
    out.push_back({r.user_id, r.target});
    for (const auto& c : r.context) {
      if (c.behavior != Behavior::view) out.push_back({r.user_id, c.item});
    }
  }
  return out;
}

std::vector<ItemId> catalog_ids(const Catalog& catalog) {
  std::vector<ItemId> items;
  for (const auto& it : catalog.items()) items.push_back(it.id);
  return items;
}

/// Teacher-forcing samples from the clicked rows accepted by `keep`.
std::vector<decoder::DecoderSample> decoder_samples(const PipelineConfig& config, std::span<const DatasetRow> rows,
                                                    std::span<const ItemId> items, const docid::DocIdTrie& trie,
                                                    const std::function<bool(const DatasetRow&)>& keep) {
  std::vector<decoder::DecoderSample> samples;
  for (const auto& r : rows) {
    if (r.click != 1 || !keep(r)) continue;
    decoder::DecodeInput in{r.user_id, r.query, {}};
    for (const auto& c : r.context) in.context.push_back(c.item);
    samples.push_back({decoder::encode_query(config.decoder, items, in), trie.docid_of(r.target)});
  }
  if (samples.empty()) throw DataError("no clicked training rows to train the decoder on");
  return samples;
}

/// Held-in queries are dealt round-robin into folds; each fold is decoded by
/// a model trained on the clicked rows of the other folds. Hits are pooled.
std::map<std::size_t, double> cross_validated_recall(const PipelineConfig& config, std::span<const DatasetRow> rows,
                                                     const Catalog& catalog, const docid::DocIdTrie& trie,
                                                     const decoder::RelevanceOracle& relevance) {
  const auto& ev = config.eval;
  const auto queries = eval_queries(rows);
  const auto items = catalog_ids(catalog);
  std::map<std::string, std::size_t> fold_of;
  for (std::size_t q = 0; q < queries.size(); ++q) fold_of[queries[q].input.query] = q % ev.folds;
  std::vector<std::vector<decoder::BeamResult>> decoded(queries.size());
  for (std::size_t f = 0; f < ev.folds && f < queries.size(); ++f) {
    const auto samples = decoder_samples(config, rows, items, trie, [&](const DatasetRow& r) {
      return fold_of.at(r.query) != f;
    });
    const decoder::DecoderTrainConfig train{
        config.decoder_train.loop(config.stage_seed("decoder-fold" + std::to_string(f))), config.decoder_loss};
    const auto result = decoder::train_decoder(samples, trie, relevance, config.decoder, items, train);
    for (std::size_t q = f; q < queries.size(); q += ev.folds) {
      const decoder::BoundDecoder scorer(result.model, result.model.encode(queries[q].input));
      decoded[q] = decoder::constrained_beam_search(scorer, trie, ev.beam_width, std::min(ev.decode_k(), trie.size()));
    }
  }
  return recall_table(decoded, queries, ev.recall_ks);
}

nlohmann::json train_log_json(const nn::TrainLog& log) {
  return {{"epoch_losses", log.epoch_losses}, {"warnings", log.warnings}};
}

}  // namespace

std::string hash_file(const fs::path& path) {
  if (path.empty()) return "";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return hex64(fnv1a(buf.str()));
}

nlohmann::json EvalReport::metrics_json() const {
  return {{"ablation", ablation},
          {"preset", preset},
          {"seed", seed},
          {"queries", queries},
          {"recall", recall_map_json(recall)},
          {"zero_shot",
           {{"queries", zero_shot_queries},
            {"removed_fraction", zero_shot_removed_fraction},
            {"recall", recall_map_json(zero_shot_recall)}}},
          {"variant", variant},
          {"recall_num", recall_num},
          {"expansion_recall", expansion_recall},
          {"token_accuracy", token_accuracy},
          {"cross_validation", {{"folds", cv_folds}, {"recall", recall_map_json(cv_recall)}}}};
}

nlohmann::json EvalReport::to_json() const {
  auto j = metrics_json();
  j["timings"] = timings;
  j["config"] = config;
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.ablation = j.at("ablation").get<std::string>();
    r.preset = j.at("preset").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.queries = j.at("queries").get<std::size_t>();
    r.recall = recall_map_from_json(j.at("recall"));
    const auto& z = j.at("zero_shot");
    r.zero_shot_queries = z.at("queries").get<std::size_t>();
    r.zero_shot_removed_fraction = z.at("removed_fraction").get<double>();
    r.zero_shot_recall = recall_map_from_json(z.at("recall"));
    r.variant = j.at("variant").get<std::string>();
    r.recall_num = j.at("recall_num").get<double>();
    r.expansion_recall = j.at("expansion_recall").get<double>();
    r.token_accuracy = j.at("token_accuracy").get<std::vector<double>>();
    if (j.contains("cross_validation")) {
      r.cv_folds = j["cross_validation"].at("folds").get<std::size_t>();
      r.cv_recall = recall_map_from_json(j["cross_validation"].at("recall"));
    }
    r.timings = j.value("timings", std::map<std::string, double>{});
    r.config = j.value("config", nlohmann::json::object());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed eval report: ") + e.what());
  }
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "configuration: " << ablation << " (preset " << preset << ", seed " << seed << ")\n";
  out << "held-in queries: " << queries << '\n';
  for (const auto& [k, v] : recall) out << "  Recall@" << k << ": " << v << '\n';
  out << "zero-shot queries: " << zero_shot_queries << " (removed fraction " << zero_shot_removed_fraction << ")\n";
  for (const auto& [k, v] : zero_shot_recall) out << "  zero-shot Recall@" << k << ": " << v << '\n';
  out << "serving variant " << variant << ": mean RecallNum " << recall_num << ", recall " << expansion_recall
      << '\n';
  if (cv_folds > 1) {
    out << cv_folds << "-fold cross-validation:\n";
    for (const auto& [k, v] : cv_recall) out << "  Recall@" << k << ": " << v << '\n';
  }
  if (!token_accuracy.empty()) {
    out << "decoder token accuracy:";
    for (double a : token_accuracy) out << ' ' << a;
    out << '\n';
  }
  for (const auto& [stage, s] : timings) out << "  " << stage << ": " << std::setprecision(2) << s << " s\n";
  return out.str();
}

std::vector<decoder::DecodeInput> read_decode_inputs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<decoder::DecodeInput> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      decoder::DecodeInput d;
      d.user_id = j.value("user_id", std::string());
      d.query = j.at("query").get<std::string>();
      for (const auto& c : j.value("context", nlohmann::json::array())) {
        d.context.push_back(c.is_object() ? c.at("item_id").get<ItemId>() : c.get<ItemId>());
      }
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_decode_result(std::ostream& out, const std::string& query, std::span<const decoder::BeamResult> results) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : results) {
    list.push_back({{"docid", r.docid.to_string()}, {"item_id", r.item}, {"logprob", r.log_prob}});
  }
  out << nlohmann::json{{"query", query}, {"results", list}}.dump() << '\n';
}

struct Pipeline::Data {
  Catalog catalog;
  std::vector<DatasetRow> train;
  std::vector<DatasetRow> test;
  std::vector<PageView> page_views;
  decoder::RelevanceOracle relevance;
  std::vector<std::string> notes;
};

Pipeline::Pipeline(PipelineConfig config, StageCallback on_stage)
    : config_(std::move(config)), on_stage_(std::move(on_stage)) {
  config_.validate();
}

fs::path Pipeline::artifact(Stage stage, std::string_view name) const {
  return config_.work_dir / std::string(to_string(stage)) / std::string(name);
}

const Pipeline::Data& Pipeline::data() {
  if (data_) return *data_;
  auto d = std::make_shared<Data>();
  const auto format = parse_row_format(config_.data.format);
  if (config_.data.catalog.empty() || config_.data.train.empty()) {
    throw ConfigError("data.catalog and data.train must be set");
  }
  d->catalog = load_catalog(config_.data.catalog);
  auto train = load_dataset(config_.data.train, format, d->catalog);
  if (train.rows.empty()) throw DataError("training dataset " + config_.data.train.string() + " has no usable rows");
  if (train.malformed) d->notes.push_back(std::to_string(train.malformed) + " malformed training rows skipped");
  if (!train.unknown_items.empty()) {
    d->notes.push_back(std::to_string(train.unknown_items.size()) + " unknown target items in training rows");
  }
  d->train = std::move(train.rows);
  d->page_views = std::move(train.page_views);
  if (!config_.data.test.empty()) d->test = load_dataset(config_.data.test, format, d->catalog).rows;
  if (!config_.data.relevance.empty()) d->relevance = decoder::RelevanceOracle::load(config_.data.relevance);
  data_ = std::move(d);
  return *data_;
}

nlohmann::json Pipeline::stage_config(Stage stage) const {
  const auto all = config_.to_json();
  nlohmann::json j = {{"seed", config_.seed}, {"format", config_.data.format}};
  switch (stage) {
    case Stage::embed:
      j["embed"] = all.at("embed");
      break;
    case Stage::metric:
      j["metric"] = all.at("metric");
      break;
    case Stage::docids:
      j["docids"] = all.at("docids");
      break;
    case Stage::decoder:
      j["decoder"] = all.at("decoder");
      break;
    case Stage::eval:
      j = all;
      j.erase("work_dir");
      break;
  }
  return j;
}

std::string Pipeline::input_hash(Stage stage) const {
  std::string text = std::string(to_string(stage)) + stage_config(stage).dump();
  auto add = [&](const fs::path& p) { text += "|" + hash_or_missing(p); };
  switch (stage) {
    case Stage::embed:
      add(config_.data.catalog);
      add(config_.data.train);
      break;
    case Stage::metric:
      add(artifact(Stage::embed, "atomic.jsonl"));
      add(config_.data.train);
      break;
    case Stage::docids:
      add(artifact(Stage::metric, "fusion.jsonl"));
      add(config_.data.catalog);
      break;
    case Stage::decoder:
      add(artifact(Stage::docids, "index.json"));
      add(config_.data.catalog);
      add(config_.data.train);
      add(config_.data.relevance);
      break;
    case Stage::eval:
      add(artifact(Stage::decoder, "model.ckpt"));
      add(artifact(Stage::decoder, "train_log.json"));
      add(artifact(Stage::docids, "index.json"));
      add(config_.data.catalog);
      add(config_.data.train);
      add(config_.data.test);
      break;
  }
  return hex64(fnv1a(text));
}

std::vector<fs::path> Pipeline::outputs(Stage stage) const {
  switch (stage) {
    case Stage::embed:
      return {artifact(stage, "model.ckpt"), artifact(stage, "atomic.jsonl")};
    case Stage::metric:
      return {artifact(stage, "model.ckpt"), artifact(stage, "fusion.jsonl")};
    case Stage::docids:
      return {artifact(stage, "index.json")};
    case Stage::decoder:
      return {artifact(stage, "model.ckpt"), artifact(stage, "train_log.json")};
    case Stage::eval:
      return {artifact(stage, "report.json"), artifact(stage, "report.txt")};
  }
  return {};
}

std::vector<StageRecord> Pipeline::run(std::span<const Stage> stages) {
  std::vector<StageRecord> records;
  for (auto s : stages) {
    records.push_back(run_stage(s));
    if (on_stage_) on_stage_(records.back());
  }
  return records;
}

std::vector<StageRecord> Pipeline::run_all() {
  const auto& t = config_.stages;
  std::vector<Stage> stages;
  const bool enabled[] = {t.embed, t.metric, t.docids, t.decoder, t.eval};
  for (std::size_t i = 0; i < kAllStages.size(); ++i) {
    if (enabled[i]) stages.push_back(kAllStages[i]);
  }
  return run(stages);
}

StageRecord Pipeline::run_stage(Stage stage) {
  const auto manifest_path = config_.work_dir / "manifest.json";
  nlohmann::json manifest = {{"version", 1}, {"stages", nlohmann::json::object()}};
  if (fs::exists(manifest_path)) {
    try {
      manifest = nn::read_json_file(manifest_path);
    } catch (const LoadError&) {
      // An unreadable manifest only costs a rerun.
    }
  }
  const std::string name(to_string(stage));
  const auto hash = input_hash(stage);
  StageRecord record{stage, false, 0.0, {}};

  const auto& entries = manifest["stages"];
  if (entries.contains(name) && entries[name].value("input_hash", std::string()) == hash) {
    bool intact = true;
    const auto& recorded = entries[name].at("outputs");
    for (const auto& p : outputs(stage)) {
      const auto rel = fs::relative(p, config_.work_dir).generic_string();
      if (!fs::exists(p) || !recorded.contains(rel) || recorded[rel].get<std::string>() != hash_file(p)) {
        intact = false;
        break;
      }
    }
    if (intact) {
      record.skipped = true;
      record.seconds = entries[name].value("seconds", 0.0);
      return record;
    }
  }

  fs::create_directories(config_.work_dir / name);
  const auto start = std::chrono::steady_clock::now();
  record.notes = execute(stage);
  record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json out_hashes = nlohmann::json::object();
  for (const auto& p : outputs(stage)) out_hashes[fs::relative(p, config_.work_dir).generic_string()] = hash_file(p);
  manifest["stages"][name] = {{"input_hash", hash}, {"outputs", out_hashes}, {"seconds", record.seconds}};
  write_json(manifest_path, manifest);
  return record;
}

std::vector<std::string> Pipeline::execute(Stage stage) {
  std::vector<std::string> notes = data().notes;
  switch (stage) {
    case Stage::embed:
      run_embed();
      break;
    case Stage::metric:
      run_metric();
      break;
    case Stage::docids: {
      auto w = run_docids();
      notes.insert(notes.end(), w.begin(), w.end());
      break;
    }
    case Stage::decoder:
      run_decoder();
      break;
    case Stage::eval:
      run_eval();
      break;
  }
  return notes;
}

void Pipeline::run_embed() {
  const auto& d = data();
  auto result = repr::train_embedding(d.train, d.catalog, config_.embed,
                                      config_.embed_train.loop(config_.stage_seed("embed")));
  result.model.save(artifact(Stage::embed, "model.ckpt"));
  std::vector<ItemId> ids;
  for (const auto& it : d.catalog.items()) ids.push_back(it.id);
  repr::write_atomic_jsonl(artifact(Stage::embed, "atomic.jsonl"),
                           repr::export_atomic_embeddings(result.model, ids, d.catalog));
  write_json(artifact(Stage::embed, "train_log.json"), train_log_json(result.log));
}

void Pipeline::run_metric() {
  const auto& d = data();
  const auto atomic = repr::read_atomic_jsonl(artifact(Stage::embed, "atomic.jsonl"));
  auto result = metric::train_metric(atomic, d.page_views, config_.metric,
                                     config_.metric_train.loop(config_.stage_seed("metric")));
  result.model.save(artifact(Stage::metric, "model.ckpt"));
  metric::write_fusion_jsonl(artifact(Stage::metric, "fusion.jsonl"), metric::fuse_all(result.model, atomic));
  auto log = train_log_json(result.log);
  log["triplets"] = result.triplet_count;
  write_json(artifact(Stage::metric, "train_log.json"), log);
}

std::vector<std::string> Pipeline::run_docids() {
  const auto& d = data();
  const auto embeddings = metric::read_fusion_jsonl(artifact(Stage::metric, "fusion.jsonl"));
  std::map<ItemId, double> scores;
  std::map<ItemId, CategoryPath> paths;
  for (const auto& it : d.catalog.items()) {
    scores[it.id] = it.efficient_score();
    paths[it.id] = it.category_path;
  }
  auto cfg = config_.docids;
  cfg.seed = config_.stage_seed("docids");
  const auto build = docid::build_docids(embeddings, scores, paths, cfg);
  const auto trie = docid::DocIdTrie::build(build.docids, build.node_scores);
  docid::save_index(artifact(Stage::docids, "index.json"), trie);
  write_json(artifact(Stage::docids, "build.json"),
             nlohmann::json{{"docids", trie.size()}, {"max_length", trie.max_length()}, {"warnings", build.warnings}});
  return build.warnings;
}

void Pipeline::run_decoder() {
  const auto& d = data();
  const auto trie = docid::load_index(artifact(Stage::docids, "index.json"));
  const auto items = catalog_ids(d.catalog);
  const auto samples = decoder_samples(config_, d.train, items, trie, [](const DatasetRow&) { return true; });
  decoder::DecoderTrainConfig train{config_.decoder_train.loop(config_.stage_seed("decoder")), config_.decoder_loss};
  auto result = decoder::train_decoder(samples, trie, d.relevance, config_.decoder, items, train);
  result.model.save(artifact(Stage::decoder, "model.ckpt"));
  auto log = train_log_json(result.log);
  log["token_accuracy"] = result.token_accuracy;
  log["samples"] = samples.size();
  write_json(artifact(Stage::decoder, "train_log.json"), log);
}

void Pipeline::run_eval() {
  const auto start = std::chrono::steady_clock::now();
  const auto& d = data();
  const auto trie = docid::load_index(artifact(Stage::docids, "index.json"));
  const auto model = decoder::DecoderModel::load(artifact(Stage::decoder, "model.ckpt"));
  const auto& ev = config_.eval;
  const auto variant = ExpansionVariant::parse(ev.variant);

  EvalReport report;
  report.ablation = config_.ablation_label();
  report.preset = config_.preset;
  report.seed = config_.seed;
  report.variant = variant.to_string();
  report.config = config_.to_json();

  const auto held_in = eval_queries(d.train);
  const auto decoded = decode_all(model, trie, held_in, ev.beam_width, ev.decode_k());
  report.queries = held_in.size();
  report.recall = recall_table(decoded, held_in, ev.recall_ks);

  recall::I2ITable i2i;
  if (variant.i2i) {
    i2i = recall::swing_scores(swing_interactions(d.train), ev.swing_alpha, ev.swing_top_n);
    recall::write_i2i_table(artifact(Stage::eval, "i2i.jsonl"), i2i);
  }
  double recall_num = 0.0;
  std::size_t covered = 0;
  for (std::size_t q = 0; q < held_in.size(); ++q) {
    const auto set = expand(decoded[q], trie, i2i, variant, ev.i2i_per_seed, ev.cap);
    recall_num += static_cast<double>(set.recall_num());
    const auto items = set.items();
    const bool hit = std::any_of(held_in[q].truth.begin(), held_in[q].truth.end(), [&](ItemId t) {
      return std::find(items.begin(), items.end(), t) != items.end();
    });
    covered += hit ? 1 : 0;
  }
  if (!held_in.empty()) {
    report.recall_num = recall_num / static_cast<double>(held_in.size());
    report.expansion_recall = static_cast<double>(covered) / static_cast<double>(held_in.size());
  }

  if (!d.test.empty()) {
    const auto split = zero_shot_split(d.train, d.test);
    const auto zs = eval_queries(split.rows);
    report.zero_shot_removed_fraction = split.removed_fraction;
    report.zero_shot_queries = zs.size();
    report.zero_shot_recall = recall_table(decode_all(model, trie, zs, ev.beam_width, ev.decode_k()), zs, ev.recall_ks);
  }

  if (ev.folds > 1) {
    report.cv_folds = ev.folds;
    report.cv_recall = cross_validated_recall(config_, d.train, d.catalog, trie, d.relevance);
  }

  const auto log = nn::read_json_file(artifact(Stage::decoder, "train_log.json"));
  const auto& acc = log.at("token_accuracy");
  if (!acc.empty()) report.token_accuracy = acc.back().get<std::vector<double>>();

  const auto manifest_path = config_.work_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    const auto manifest = nn::read_json_file(manifest_path);
    for (auto s : {Stage::embed, Stage::metric, Stage::docids, Stage::decoder}) {
      const std::string name(to_string(s));
      if (manifest["stages"].contains(name)) report.timings[name] = manifest["stages"][name].value("seconds", 0.0);
    }
  }
  report.timings["eval"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_json(artifact(Stage::eval, "report.json"), report.to_json());
  std::ofstream txt(artifact(Stage::eval, "report.txt"));
  txt << report.to_text();
}

EvalReport Pipeline::report() const { return EvalReport::from_json(nn::read_json_file(artifact(Stage::eval, "report.json"))); }

}  // namespace genret::pipeline
