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

#include "genret/decoder/beam_search.hpp"
#include "genret/decoder/model.hpp"
#include "genret/docid/trie.hpp"
#include "genret/error.hpp"
#include "genret/pipeline/config.hpp"
#include "genret/pipeline/pipeline.hpp"
#include "genret/pipeline/synthetic.hpp"
#include "genret/recall/expansion.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace genret;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumeric = 4 };

struct CommonOptions {
  std::string config_file;
  std::string preset = "desk";
  std::string data_dir;
  std::string work_dir;
  std::optional<std::uint64_t> seed;
  bool plain_loss = false;
  bool flat_clustering = false;
  bool print_config = false;
  std::optional<std::size_t> folds;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_file, "JSON config file (overlays the preset)");
  cmd->add_option("--preset", o.preset, "desk or large")->check(CLI::IsMember({"desk", "large"}));
  cmd->add_option("--data", o.data_dir, "directory with catalog.jsonl, train.jsonl, test.jsonl, relevance.jsonl");
  cmd->add_option("--work-dir", o.work_dir, "artifact directory");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_flag("--no-position-aware-loss", o.plain_loss, "train the decoder with plain token cross-entropy");
  cmd->add_flag("--no-category-guided", o.flat_clustering, "cluster the whole catalog without category tokens");
  cmd->add_option("--folds", o.folds, "k-fold cross-validation of held-in recall in the eval stage")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--print-config", o.print_config, "print the resolved config before running");
}

pipeline::PipelineConfig resolve(const CommonOptions& o) {
  std::optional<fs::path> file;
  if (!o.config_file.empty()) file = o.config_file;
  auto cfg = pipeline::load_config(file, pipeline::process_env(), o.preset);
  if (!o.data_dir.empty()) {
    const fs::path d = o.data_dir;
    cfg.data.catalog = d / "catalog.jsonl";
    cfg.data.train = d / "train.jsonl";
    cfg.data.test = fs::exists(d / "test.jsonl") ? d / "test.jsonl" : fs::path();
    cfg.data.relevance = fs::exists(d / "relevance.jsonl") ? d / "relevance.jsonl" : fs::path();
  }
  if (!o.work_dir.empty()) cfg.work_dir = o.work_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.plain_loss) cfg.decoder_loss.mode = decoder::LossMode::plain;
  if (o.flat_clustering) cfg.docids.category_guided = false;
  if (o.folds) cfg.eval.folds = *o.folds;
  cfg.validate();
  if (o.print_config) std::cout << cfg.to_json().dump(2) << '\n';
  return cfg;
}

void print_stage(const pipeline::StageRecord& r) {
  std::cerr << "[" << pipeline::to_string(r.stage) << "] " << (r.skipped ? "skipped (unchanged)" : "done") << " in "
            << r.seconds << " s\n";
  constexpr std::size_t kMaxNotes = 5;
  for (std::size_t i = 0; i < r.notes.size() && i < kMaxNotes; ++i) std::cerr << "  note: " << r.notes[i] << '\n';
  if (r.notes.size() > kMaxNotes) std::cerr << "  (" << r.notes.size() - kMaxNotes << " more notes)\n";
}

int run_stages(const CommonOptions& o, std::span<const pipeline::Stage> stages, bool all) {
  pipeline::Pipeline p(resolve(o), print_stage);
  if (all) {
    p.run_all();
  } else {
    p.run(stages);
  }
  if (all || (!stages.empty() && stages.back() == pipeline::Stage::eval)) std::cout << p.report().to_text();
  return kOk;
}

int decode(const std::string& checkpoint, const std::string& index, const std::string& input,
           const std::string& output, std::size_t beam, std::size_t topk) {
  const auto model = decoder::DecoderModel::load(checkpoint);
  const auto trie = docid::load_index(index);
  const auto requests = pipeline::read_decode_inputs(input);
  std::ofstream file;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw Error("cannot write " + output);
  }
  std::ostream& out = output.empty() ? std::cout : file;
  for (const auto& r : requests) {
    const decoder::BoundDecoder scorer(model, model.encode(r));
    const auto results = decoder::constrained_beam_search(scorer, trie, beam, std::min(topk, trie.size()));
    pipeline::write_decode_result(out, r.query, results);
  }
  return kOk;
}

int expand(const std::string& index, const std::string& decoded_path, const std::string& variant_name,
           const std::string& i2i_path, std::size_t per_seed, std::size_t cap) {
  const auto trie = docid::load_index(index);
  const auto variant = pipeline::ExpansionVariant::parse(variant_name);
  recall::I2ITable i2i;
  if (variant.i2i) {
    if (i2i_path.empty()) throw ConfigError("--i2i is required for i2i variants");
    i2i = recall::read_i2i_table(i2i_path);
  }
  std::ifstream in(decoded_path);
  if (!in) throw LoadError("cannot open " + decoded_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    std::vector<decoder::BeamResult> decoded;
    for (const auto& r : j.at("results")) {
      const auto item = r.at("item_id").get<ItemId>();
      decoded.push_back({trie.docid_of(item), item, r.at("logprob").get<double>()});
    }
    const auto set = pipeline::expand(decoded, trie, i2i, variant, per_seed, cap);
    nlohmann::json items = nlohmann::json::array();
    for (const auto& e : set.entries) {
      items.push_back({{"item_id", e.item}, {"source", recall::to_string(e.tag)}, {"score", e.score}});
    }
    std::cout << nlohmann::json{{"query", j.value("query", std::string())}, {"recall_num", set.recall_num()},
                                {"items", items}}
                     .dump()
              << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative retrieval with hierarchical docIDs: training, indexing, decoding and evaluation"};
  app.require_subcommand(1);

  CommonOptions common;
  struct StageCommand {
    const char* name;
    const char* help;
    pipeline::Stage stage;
  };
  const StageCommand stage_commands[] = {
      {"train-embed", "train the two-tower model and export atomic embeddings", pipeline::Stage::embed},
      {"train-metric", "train the fusion model with triplet metric learning", pipeline::Stage::metric},
      {"build-docids", "cluster fused embeddings into docIDs and write the index", pipeline::Stage::docids},
      {"train-decoder", "train the docID decoder", pipeline::Stage::decoder},
      {"eval", "decode held-in and zero-shot queries and write the report", pipeline::Stage::eval},
  };
  std::vector<std::pair<CLI::App*, pipeline::Stage>> stage_apps;
  for (const auto& c : stage_commands) {
    auto* cmd = app.add_subcommand(c.name, c.help);
    add_common(cmd, common);
    stage_apps.emplace_back(cmd, c.stage);
  }
  auto* run_all = app.add_subcommand("run-all", "run every enabled stage, skipping unchanged ones");
  add_common(run_all, common);

  std::string checkpoint, index, input, output, variant = "direct", i2i_path;
  std::size_t beam = 20, topk = 10, cap = recall::kDefaultRecallCap, per_seed = 10;
  auto* dec = app.add_subcommand("decode", "constrained beam search for JSONL requests");
  dec->add_option("--checkpoint", checkpoint, "decoder checkpoint")->required();
  dec->add_option("--index", index, "docID index")->required();
  dec->add_option("--input", input, "JSONL requests {user_id, query, context}")->required();
  dec->add_option("--output", output, "JSONL output (default stdout)");
  dec->add_option("--beam", beam, "beam width")->check(CLI::PositiveNumber);
  dec->add_option("--topk", topk, "results per query")->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("expand", "widen decoded results into a recall set");
  exp->add_option("--index", index, "docID index")->required();
  exp->add_option("--input", input, "decode output JSONL")->required();
  exp->add_option("--variant", variant, "direct, cluster-K, i2i or cluster-K-i2i");
  exp->add_option("--i2i", i2i_path, "I2I table JSONL");
  exp->add_option("--per-seed", per_seed, "I2I neighbors per decoded item");
  exp->add_option("--cap", cap, "maximum recall set size");

  pipeline::SyntheticConfig synth;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen-synthetic", "write the synthetic corpus");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--seed", synth.seed, "generator seed");
  gen->add_option("--items", synth.items, "catalog size");
  gen->add_option("--train-queries", synth.train_queries, "training queries");
  gen->add_option("--test-queries", synth.test_queries, "test queries");
  gen->add_option("--overlap", synth.test_overlap, "share of test rows repeating a training pair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    for (const auto& [cmd, stage] : stage_apps) {
      if (cmd->parsed()) {
        const pipeline::Stage stages[] = {stage};
        return run_stages(common, stages, false);
      }
    }
    if (run_all->parsed()) return run_stages(common, {}, true);
    if (dec->parsed()) {
      if (beam < topk) throw ConfigError("--beam must be at least --topk");
      return decode(checkpoint, index, input, output, beam, topk);
    }
    if (exp->parsed()) return expand(index, input, variant, i2i_path, per_seed, cap);
    if (gen->parsed()) {
      const auto corpus = pipeline::generate_synthetic(synth);
      pipeline::write_synthetic(out_dir, corpus);
      std::cout << "wrote " << corpus.catalog.size() << " items, " << corpus.train.size() << " training rows, "
                << corpus.test.size() << " test rows to " << out_dir << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
