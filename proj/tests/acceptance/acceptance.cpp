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

// Acceptance gates. Prints one "criterion N: PASS|FAIL detail" line per
// gate and exits non-zero when any gate fails.

#include "genret/decoder/beam_search.hpp"
#include "genret/decoder/model.hpp"
#include "genret/decoder/position_weights.hpp"
#include "genret/docid/builder.hpp"
#include "genret/docid/trie.hpp"
#include "genret/error.hpp"
#include "genret/metric/fusion.hpp"
#include "genret/nn/gradcheck.hpp"
#include "genret/pipeline/config.hpp"
#include "genret/pipeline/metrics.hpp"
#include "genret/pipeline/pipeline.hpp"
#include "genret/pipeline/synthetic.hpp"
#include "genret/recall/expansion.hpp"
#include "genret/repr/two_tower.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace genret;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream out;
  out << std::setprecision(precision) << x;
  return out.str();
}

nn::Vector random_vector(Eigen::Index d, nn::Rng& rng) {
  nn::Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = nn::uniform(rng, -1.0, 1.0);
  return v;
}

Eigen::Index random_dim(nn::Rng& rng, Eigen::Index lo, Eigen::Index hi) {
  return lo + static_cast<Eigen::Index>(nn::uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

// ---------------------------------------------------------------- gradients

double embed_gradcheck(std::uint64_t seed) {
  nn::Rng rng(seed);
  std::vector<Item> items;
  const auto n_items = 6 + nn::uniform_index(rng, 5);
  for (std::size_t i = 0; i < n_items; ++i) {
    items.push_back({static_cast<ItemId>(10 + i), {1, static_cast<CategoryId>(20 + i % 3)},
                     "w" + std::to_string(i) + " common t" + std::to_string(i % 4), nn::uniform(rng, 0, 1),
                     std::floor(nn::uniform(rng, 0, 30)), std::floor(nn::uniform(rng, 0, 4))});
  }
  const Catalog catalog(items);
  repr::TwoTowerConfig cfg;
  cfg.d_k = random_dim(rng, 2, 6);
  cfg.d_u = random_dim(rng, 2, 6);
  cfg.d_e = random_dim(rng, 3, 8);
  cfg.d_atomic = random_dim(rng, 2, 6);
  cfg.query_len = 2;
  cfg.context_len = 3;
  cfg.user_hidden = random_dim(rng, 3, 10);
  cfg.head_hidden = random_dim(rng, 3, 10);
  cfg.token_buckets = 16;
  cfg.user_buckets = 4;
  repr::TwoTowerModel model(cfg, catalog, seed);
  std::vector<repr::EncodedSample> batch;
  const auto b = 2 + nn::uniform_index(rng, 7);
  for (std::size_t i = 0; i < b; ++i) {
    DatasetRow r;
    r.user_id = "u" + std::to_string(nn::uniform_index(rng, 5));
    r.query = "w" + std::to_string(nn::uniform_index(rng, n_items)) + " common";
    for (std::size_t c = nn::uniform_index(rng, 4); c > 0; --c) {
      r.context.push_back({items[nn::uniform_index(rng, n_items)].id, Behavior::click});
    }
    r.target = items[nn::uniform_index(rng, n_items)].id;
    r.relevance = static_cast<int>(nn::uniform_index(rng, 2));
    r.click = static_cast<int>(nn::uniform_index(rng, 2));
    batch.push_back(model.encode(r, catalog));
  }
  return nn::finite_diff_gradcheck([&](bool g) { return model.loss(batch, g); }, model.parameters())
      .max_relative_error;
}

double triplet_vector_gradcheck(std::uint64_t seed) {
  nn::Rng rng(seed);
  const auto d = random_dim(rng, 2, 16);
  nn::Parameter a("a", random_vector(d, rng)), p("p", random_vector(d, rng)), n("n", random_vector(d, rng));
  const double margin = 2.0 * std::sqrt(static_cast<double>(d));  // keeps the hinge active
  const auto fn = [&](bool grad) {
    nn::Vector da = nn::Vector::Zero(d), dp = nn::Vector::Zero(d), dn = nn::Vector::Zero(d);
    const double loss = metric::triplet_loss_grad(a.value, p.value, n.value, margin, da, dp, dn);
    if (grad) {
      a.grad += da;
      p.grad += dp;
      n.grad += dn;
    }
    return loss;
  };
  return nn::finite_diff_gradcheck(fn, {&a, &p, &n}).max_relative_error;
}

// Through the fusion MLP. The output bias cancels in every distance, so its
// analytic gradient is exactly zero and is checked separately.
std::pair<double, double> triplet_net_gradcheck(std::uint64_t seed) {
  nn::Rng rng(seed);
  metric::FusionConfig cfg;
  cfg.d_atomic = random_dim(rng, 2, 5);
  cfg.d = random_dim(rng, 2, 16);
  cfg.hidden = random_dim(rng, 2, 16);
  cfg.margin = 10.0;
  metric::FusionModel model(cfg, seed);
  std::vector<repr::AtomicEmbeddings> items;
  for (int i = 0; i < 8; ++i) {
    items.push_back({random_vector(cfg.d_atomic, rng), random_vector(cfg.d_atomic, rng),
                     random_vector(cfg.d_atomic, rng)});
  }
  std::vector<std::array<std::size_t, 3>> triplets;
  const auto b = 1 + nn::uniform_index(rng, 8);
  for (std::size_t i = 0; i < b; ++i) {
    // Distinct items keep every distance away from the kink of the norm at 0.
    std::array<std::size_t, 8> order = {0, 1, 2, 3, 4, 5, 6, 7};
    nn::shuffle(order.begin(), order.end(), rng);
    triplets.push_back({order[0], order[1], order[2]});
  }
  const double scale = 1.0 / static_cast<double>(triplets.size());
  const auto fn = [&](bool grad) {
    double total = 0;
    for (const auto& [ia, ip, in] : triplets) {
      nn::DenseNet::Cache ca, cp, cn;
      const nn::Vector va = model.net().forward(metric::fusion_input(items[ia]), &ca);
      const nn::Vector vp = model.net().forward(metric::fusion_input(items[ip]), &cp);
      const nn::Vector vn = model.net().forward(metric::fusion_input(items[in]), &cn);
      nn::Vector da = nn::Vector::Zero(cfg.d), dp = nn::Vector::Zero(cfg.d), dn = nn::Vector::Zero(cfg.d);
      total += metric::triplet_loss_grad(va, vp, vn, cfg.margin, da, dp, dn);
      if (grad) {
        model.net().backward(ca, scale * da);
        model.net().backward(cp, scale * dp);
        model.net().backward(cn, scale * dn);
      }
    }
    return scale * total;
  };
  auto params = model.parameters();
  nn::zero_grads(params);
  fn(true);
  const double bias_grad = params.back()->grad.cwiseAbs().maxCoeff();
  params.pop_back();
  return {nn::finite_diff_gradcheck(fn, params).max_relative_error, bias_grad};
}

struct RandomIndex {
  std::vector<ItemId> items;
  std::map<ItemId, docid::DocId> docids;
  docid::DocIdTrie trie;
  decoder::RelevanceOracle oracle;
};

/// Category-guided index over random 2-d embeddings.
RandomIndex random_index(std::size_t n_items, std::size_t n_leaves, std::size_t k, std::size_t cs, nn::Rng& rng) {
  RandomIndex out;
  std::map<ItemId, nn::Vector> emb;
  std::map<ItemId, double> scores;
  std::map<ItemId, CategoryPath> paths;
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto id = static_cast<ItemId>(1000 + i);
    emb[id] = random_vector(2, rng);
    scores[id] = nn::uniform(rng, 0, 1);
    const auto leaf = static_cast<CategoryId>(nn::uniform_index(rng, n_leaves));
    paths[id] = {static_cast<CategoryId>(1 + leaf % 3), static_cast<CategoryId>(100 + leaf)};
    out.items.push_back(id);
  }
  docid::DocIdBuildConfig cfg;
  cfg.k = k;
  cfg.max_cluster_size = cs;
  cfg.seed = rng();
  const auto build = docid::build_docids(emb, scores, paths, cfg);
  out.docids = build.docids;
  out.trie = docid::DocIdTrie::build(build.docids, build.node_scores);
  for (std::size_t a = 0; a < n_leaves; ++a) {
    for (std::size_t b = a + 1; b < n_leaves; ++b) {
      if (nn::uniform01(rng) < 0.3) {
        out.oracle.set(static_cast<CategoryId>(100 + a), static_cast<CategoryId>(100 + b), nn::uniform(rng, 0, 1));
      }
    }
  }
  return out;
}

decoder::DecoderConfig small_decoder(nn::Rng& rng) {
  decoder::DecoderConfig c;
  c.d_k = random_dim(rng, 2, 6);
  c.d_u = random_dim(rng, 2, 4);
  c.context_hidden = random_dim(rng, 3, 8);
  c.d_context = random_dim(rng, 2, 6);
  c.d_token = random_dim(rng, 2, 6);
  c.d_hidden = random_dim(rng, 3, 8);
  c.max_query_tokens = 3;
  c.max_context_items = 2;
  c.token_buckets = 8;
  c.user_buckets = 3;
  return c;
}

std::vector<decoder::DecoderSample> decoder_samples(const decoder::DecoderModel& model, const RandomIndex& idx,
                                                    std::size_t n, nn::Rng& rng) {
  std::vector<decoder::DecoderSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto target = idx.items[nn::uniform_index(rng, idx.items.size())];
    const std::vector<ItemId> ctx = {idx.items[nn::uniform_index(rng, idx.items.size())]};
    out.push_back({model.encode({"u" + std::to_string(nn::uniform_index(rng, 5)),
                                 "q" + std::to_string(nn::uniform_index(rng, 9)) + " shop", ctx}),
                   idx.docids.at(target)});
  }
  return out;
}

double position_aware_gradcheck(std::uint64_t seed) {
  nn::Rng rng(seed);
  const auto idx = random_index(12 + nn::uniform_index(rng, 10), 4, 2, 3, rng);
  decoder::DecoderModel model(small_decoder(rng), decoder::PositionVocab::from_trie(idx.trie), idx.items, seed);
  const auto batch = decoder_samples(model, idx, 2 + nn::uniform_index(rng, 7), rng);
  return nn::finite_diff_gradcheck(
             [&](bool g) { return model.position_aware_loss(batch, idx.trie, idx.oracle, {}, g); },
             model.parameters())
      .max_relative_error;
}

Outcome criterion_gradients() {
  double embed = 0, triplet = 0, net = 0, bias = 0, position = 0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    embed = std::max(embed, embed_gradcheck(s));
    triplet = std::max(triplet, triplet_vector_gradcheck(s));
    const auto [n, b] = triplet_net_gradcheck(s);
    net = std::max(net, n);
    bias = std::max(bias, b);
    position = std::max(position, position_aware_gradcheck(s));
  }
  const double worst = std::max({embed, triplet, net, position});
  return {worst < 1e-4 && bias < 1e-12,
          "max relative error: embedding " + fmt(embed) + ", triplet " + fmt(triplet) + ", triplet via fusion net " +
              fmt(net) + ", position-aware " + fmt(position) + " (output-bias grad " + fmt(bias) + ")"};
}

// ---------------------------------------------------------- position weights

Outcome criterion_weight_law() {
  double worst_sum = 0;
  bool monotone = true;
  for (std::size_t last = 1; last <= 16; ++last) {
    const auto w = decoder::hierarchical_weights(last);
    double sum = 0;
    for (std::size_t t = 0; t < w.size(); ++t) {
      sum += w[t];
      if (!(w[t] > 0) || (t > 0 && !(w[t] < w[t - 1]))) monotone = false;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  const auto w2 = decoder::hierarchical_weights(2);
  const double want[3] = {0.665241, 0.244728, 0.090031};
  double worst_value = 0;
  for (int t = 0; t < 3; ++t) worst_value = std::max(worst_value, std::abs(w2[static_cast<std::size_t>(t)] - want[t]));
  return {worst_sum <= 1e-12 && monotone && worst_value <= 1e-6,
          "max |sum - 1| " + fmt(worst_sum) + ", strictly decreasing and positive: " + (monotone ? "yes" : "no") +
              ", L=2 deviation " + fmt(worst_value)};
}

// ------------------------------------------------------------ docID builder

std::map<docid::Prefix, double> brute_force_e(const std::map<ItemId, docid::DocId>& docids,
                                              const std::map<ItemId, double>& scores) {
  std::map<docid::Prefix, std::pair<double, int>> acc;
  for (const auto& [id, d] : docids) {
    for (std::size_t len = d.semantic_len() + 1; len <= d.size(); ++len) {
      auto& [sum, n] = acc[docid::Prefix(d.values().begin(), d.values().begin() + static_cast<std::ptrdiff_t>(len))];
      sum += scores.at(id);
      ++n;
    }
  }
  std::map<docid::Prefix, double> out;
  for (const auto& [p, sn] : acc) out[p] = sn.first / sn.second;
  return out;
}

Outcome criterion_docid_invariants() {
  constexpr std::size_t kCatalogs = 200, kK = 4, kCs = 8;
  std::size_t duplicate = 0, prefix = 0, oversized = 0, budget_exhausted = 0;
  double worst_e = 0;
  nn::Rng rng(2024);
  for (std::size_t c = 0; c < kCatalogs; ++c) {
    const auto n_items = 1 + nn::uniform_index(rng, 500);
    const auto n_cats = 2 + nn::uniform_index(rng, 9);
    std::map<ItemId, nn::Vector> emb;
    std::map<ItemId, double> scores;
    std::map<ItemId, CategoryPath> paths;
    const auto dim = static_cast<Eigen::Index>(2 + nn::uniform_index(rng, 4));
    for (std::size_t i = 0; i < n_items; ++i) {
      const auto id = static_cast<ItemId>(i + 1);
      emb[id] = random_vector(dim, rng);
      scores[id] = nn::uniform(rng, 0, 1);
      const auto leaf = nn::uniform_index(rng, n_cats);
      paths[id] = {static_cast<CategoryId>(1 + leaf % 2), static_cast<CategoryId>(10 + leaf)};
    }
    docid::DocIdBuildConfig cfg;
    cfg.k = kK;
    cfg.max_cluster_size = kCs;
    cfg.seed = c;
    const auto build = docid::build_docids(emb, scores, paths, cfg);
    if (!build.warnings.empty()) ++budget_exhausted;

    std::set<docid::DocId> unique;
    for (const auto& [id, d] : build.docids) unique.insert(d);
    if (unique.size() != n_items) ++duplicate;

    for (const auto& [a, da] : build.docids) {
      const auto& path = paths.at(a);
      if (da.semantic_len() != path.size() ||
          !std::equal(path.begin(), path.end(), da.values().begin())) {
        ++prefix;
      }
    }

    const auto trie = docid::DocIdTrie::build(build.docids, build.node_scores);
    for (docid::DocIdTrie::NodeId id = 0; id < trie.node_count(); ++id) {
      const auto& n = trie.node(id);
      if (n.item || n.children.empty() || !trie.is_leaf(n.children.begin()->second)) continue;
      if (n.children.size() > kCs && build.warnings.empty()) ++oversized;
    }

    const auto want = brute_force_e(build.docids, scores);
    if (want.size() != build.node_scores.size()) worst_e = std::max(worst_e, 1.0);
    for (const auto& [p, e] : want) {
      const auto it = build.node_scores.find(p);
      worst_e = std::max(worst_e, it == build.node_scores.end() ? 1.0 : std::abs(it->second - e));
    }
  }
  return {duplicate == 0 && prefix == 0 && oversized == 0 && worst_e <= 1e-12,
          std::to_string(kCatalogs) + " catalogs: duplicate-docID catalogs " + std::to_string(duplicate) +
              ", category-prefix violations " + std::to_string(prefix) + ", unsplit nodes above CS " +
              std::to_string(oversized) + ", max |E - brute force| " + fmt(worst_e) + ", builds with warnings " +
              std::to_string(budget_exhausted)};
}

// --------------------------------------------------------------- beam search

Outcome criterion_beam_oracle() {
  constexpr std::size_t kInstances = 100;
  std::size_t mismatched = 0, largest = 0;
  nn::Rng rng(77);
  for (std::size_t i = 0; i < kInstances; ++i) {
    const auto idx = random_index(1 + nn::uniform_index(rng, 200), 2 + nn::uniform_index(rng, 6),
                                  2 + nn::uniform_index(rng, 3), 2 + nn::uniform_index(rng, 5), rng);
    largest = std::max(largest, idx.trie.size());
    decoder::DecoderModel model(small_decoder(rng), decoder::PositionVocab::from_trie(idx.trie), idx.items, rng());
    const auto query = decoder_samples(model, idx, 1, rng)[0].query;
    const decoder::BoundDecoder scorer(model, query);

    std::vector<std::pair<double, docid::Prefix>> all;
    for (const auto& [d, item] : idx.trie.enumerate()) {
      double lp = 0;
      docid::Prefix prefix;
      for (std::size_t t = 0; t < d.size(); ++t) {
        const docid::TokenValue v = d[t];
        double s = 0;
        scorer.log_probs(prefix, std::span<const docid::TokenValue>(&v, 1), std::span<double>(&s, 1));
        lp += s;
        prefix.push_back(v);
      }
      all.emplace_back(lp, prefix);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return decoder::beam_before(a.first, a.second, b.first, b.second);
    });
    const auto width = idx.trie.size() + nn::uniform_index(rng, 5);
    const auto got = decoder::constrained_beam_search(scorer, idx.trie, width, idx.trie.size());
    bool same = got.size() == all.size();
    for (std::size_t r = 0; same && r < got.size(); ++r) {
      same = std::equal(got[r].docid.values().begin(), got[r].docid.values().end(), all[r].second.begin(),
                        all[r].second.end()) &&
             got[r].log_prob == all[r].first;
    }
    if (!same) ++mismatched;
  }
  return {mismatched == 0, std::to_string(kInstances) + " instances (up to " + std::to_string(largest) +
                               " docIDs): order mismatches " + std::to_string(mismatched)};
}

// --------------------------------------------------------- cluster expansion

Outcome criterion_expansion_nesting() {
  constexpr std::size_t kIndices = 50;
  std::size_t violations = 0, checks = 0;
  nn::Rng rng(99);
  for (std::size_t i = 0; i < kIndices; ++i) {
    const auto idx = random_index(20 + nn::uniform_index(rng, 180), 2 + nn::uniform_index(rng, 6),
                                  2 + nn::uniform_index(rng, 3), 2 + nn::uniform_index(rng, 6), rng);
    std::vector<decoder::BeamResult> decoded;
    std::set<ItemId> chosen;
    for (std::size_t n = 1 + nn::uniform_index(rng, 10); n > 0; --n) {
      const auto item = idx.items[nn::uniform_index(rng, idx.items.size())];
      if (chosen.insert(item).second) decoded.push_back({idx.docids.at(item), item, -nn::uniform(rng, 0, 5)});
    }
    for (std::size_t k = idx.trie.max_length(); k >= 2; --k) {
      const auto longer = recall::cluster_expand(decoded, idx.trie, k);
      const auto shorter = recall::cluster_expand(decoded, idx.trie, k - 1);
      const auto si = shorter.items();
      const std::set<ItemId> sset(si.begin(), si.end());
      for (auto id : longer.items()) {
        if (!sset.count(id)) ++violations;
      }
      if (shorter.recall_num() < longer.recall_num()) ++violations;
      ++checks;
    }
  }
  return {violations == 0, std::to_string(kIndices) + " indices, " + std::to_string(checks) +
                               " (K, K-1) pairs: containment or RecallNum violations " + std::to_string(violations)};
}

// ----------------------------------------------------------- metric learning

Outcome criterion_metric_learning() {
  constexpr int kClusters = 4, kPerCluster = 15;
  constexpr Eigen::Index kDim = 6;
  nn::Rng rng(31);
  std::vector<nn::Vector> centers;
  for (int c = 0; c < kClusters; ++c) centers.push_back(1.5 * random_vector(kDim, rng));
  repr::AtomicTable atomic;
  std::map<ItemId, int> cluster;
  for (int c = 0; c < kClusters; ++c) {
    for (int i = 0; i < kPerCluster; ++i) {
      const auto id = static_cast<ItemId>(c * kPerCluster + i);
      // The latent cluster shows up in one of the three atomic vectors only.
      atomic[id] = {random_vector(kDim, rng), random_vector(kDim, rng),
                    centers[static_cast<std::size_t>(c)] + 0.5 * random_vector(kDim, rng)};
      cluster[id] = c;
    }
  }
  // Each page shows a clicked cluster next to a skipped one.
  std::vector<PageView> pvs;
  for (int p = 0; p < 120; ++p) {
    const int pos = static_cast<int>(nn::uniform_index(rng, kClusters));
    int neg = static_cast<int>(nn::uniform_index(rng, kClusters - 1));
    if (neg >= pos) ++neg;
    PageView pv{"pv" + std::to_string(p), {}};
    for (int i = 0; i < 3; ++i) {
      pv.entries.push_back({static_cast<ItemId>(pos * kPerCluster + static_cast<int>(nn::uniform_index(rng, kPerCluster))), 1});
      pv.entries.push_back({static_cast<ItemId>(neg * kPerCluster + static_cast<int>(nn::uniform_index(rng, kPerCluster))), 0});
    }
    pvs.push_back(std::move(pv));
  }
  const auto intra_minus_inter = [&](const metric::FusionTable& fused) {
    double intra = 0, inter = 0;
    std::size_t ni = 0, nx = 0;
    for (const auto& [a, va] : fused) {
      for (const auto& [b, vb] : fused) {
        if (a >= b) continue;
        const double d = (va - vb).norm();
        if (cluster.at(a) == cluster.at(b)) {
          intra += d;
          ++ni;
        } else {
          inter += d;
          ++nx;
        }
      }
    }
    return intra / static_cast<double>(ni) - inter / static_cast<double>(nx);
  };
  metric::FusionConfig cfg;
  cfg.d_atomic = kDim;
  cfg.d = 8;
  cfg.hidden = 16;
  nn::TrainLoopConfig loop;
  loop.learning_rate = 0.01;
  loop.batch_size = 32;
  loop.epochs = 20;
  loop.seed = 5;
  const double before = intra_minus_inter(metric::fuse_all(metric::FusionModel(cfg, loop.seed), atomic));
  const auto result = metric::train_metric(atomic, pvs, cfg, loop);
  const double after = intra_minus_inter(metric::fuse_all(result.model, atomic));
  const double reduction = (before - after) / std::abs(before);
  return {reduction >= 0.3, "intra - inter distance " + fmt(before) + " -> " + fmt(after) + ", reduction " +
                                fmt(100 * reduction, 3) + "% over " + std::to_string(result.triplet_count) +
                                " triplets"};
}

// ------------------------------------------------------------ end to end

struct Run {
  pipeline::EvalReport report;
  double seconds = 0;
};

Run run_all(const fs::path& data, const fs::path& work, std::uint64_t seed,
            const std::function<void(pipeline::PipelineConfig&)>& adjust = {}) {
  auto cfg = pipeline::PipelineConfig::desk();
  cfg.seed = seed;
  cfg.work_dir = work;
  cfg.data.catalog = data / "catalog.jsonl";
  cfg.data.train = data / "train.jsonl";
  cfg.data.test = data / "test.jsonl";
  cfg.data.relevance = data / "relevance.jsonl";
  if (adjust) adjust(cfg);
  const auto start = std::chrono::steady_clock::now();
  pipeline::Pipeline p(cfg);
  p.run_all();
  const auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {p.report(), seconds};
}

fs::path synthetic_data(const fs::path& work_root) {
  const auto dir = work_root / "data";
  pipeline::write_synthetic(dir, pipeline::generate_synthetic({}));
  return dir;
}

Outcome criterion_end_to_end(const fs::path& root, const fs::path& data, pipeline::EvalReport& out) {
  fs::remove_all(root / "e2e");
  const auto run = run_all(data, root / "e2e", 1);
  out = run.report;
  const double r1 = run.report.recall.at(1), r10 = run.report.recall.at(10);
  return {r10 >= 0.9 && r1 >= 0.6 && run.seconds < 300,
          std::to_string(run.report.queries) + " held-in queries: Recall@1 " + fmt(r1) + ", Recall@10 " + fmt(r10) +
              ", run-all " + fmt(run.seconds, 3) + " s"};
}

Outcome criterion_ablation(const fs::path& root, const fs::path& data) {
  const std::vector<std::pair<std::string, std::function<void(pipeline::PipelineConfig&)>>> variants = {
      {"full", {}},
      {"w/o position-aware loss", [](auto& c) { c.decoder_loss.mode = decoder::LossMode::plain; }},
      {"w/o category-guided clustering", [](auto& c) { c.docids.category_guided = false; }}};
  std::map<std::string, double> held_in, zero_shot;
  constexpr std::uint64_t kSeeds = 5;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const auto work = root / ("ablation_seed" + std::to_string(seed) + "_" + std::to_string(v));
      fs::remove_all(work);
      const auto run = run_all(data, work, seed, variants[v].second);
      held_in[variants[v].first] += run.report.recall.at(10) / kSeeds;
      zero_shot[variants[v].first] += run.report.zero_shot_recall.at(10) / kSeeds;
    }
  }
  std::cout << "  ablation report, mean Recall@10 over " << kSeeds << " seeds (held-in / zero-shot):\n";
  for (const auto& [name, fn] : variants) {
    std::cout << "    " << std::left << std::setw(32) << name << std::fixed << std::setprecision(4) << held_in[name]
              << " / " << zero_shot[name] << '\n';
  }
  std::cout.unsetf(std::ios::fixed);
  bool pass = true;
  std::string detail = "full " + fmt(held_in["full"]);
  for (std::size_t v = 1; v < variants.size(); ++v) {
    const auto& name = variants[v].first;
    pass = pass && held_in["full"] >= held_in[name] - 0.02;
    detail += ", " + name + " " + fmt(held_in[name]);
  }
  return {pass, "mean held-in Recall@10: " + detail};
}

Outcome criterion_zero_shot() {
  std::vector<DatasetRow> train, test;
  for (int i = 0; i < 200; ++i) {
    train.push_back({"u" + std::to_string(i % 9), "query " + std::to_string(i), {}, i, 1, 1, i});
  }
  for (int i = 0; i < 200; ++i) {
    // Rows 0..129 repeat a training (query, target) pair: 65% overlap.
    const bool overlap = i < 130;
    test.push_back({"t" + std::to_string(i % 5), overlap ? "query " + std::to_string(i) : "fresh " + std::to_string(i),
                    {}, overlap ? i : i + 1000, 1, 1, i});
  }
  nn::Rng rng(3);
  nn::shuffle(test.begin(), test.end(), rng);
  const auto split = pipeline::zero_shot_split(train, test);
  const auto again = pipeline::zero_shot_split(train, split.rows);
  bool idempotent = again.rows.size() == split.rows.size() && again.removed_fraction == 0.0;
  for (std::size_t i = 0; idempotent && i < split.rows.size(); ++i) {
    idempotent = again.rows[i].query == split.rows[i].query && again.rows[i].target == split.rows[i].target;
  }
  return {split.removed_fraction == 0.65 && split.rows.size() == 70 && idempotent,
          "removed fraction " + fmt(split.removed_fraction, 6) + " (" + std::to_string(split.rows.size()) +
              " of 200 rows kept), idempotent: " + (idempotent ? "yes" : "no")};
}

Outcome criterion_determinism(const fs::path& root, const fs::path& data, const pipeline::EvalReport& first) {
  fs::remove_all(root / "e2e_repeat");
  const auto second = run_all(data, root / "e2e_repeat", 1).report;
  const bool same = first.metrics_json() == second.metrics_json();
  return {same, std::string("metrics of two fresh run-all executions are ") + (same ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance gates");
  std::string work_dir = (fs::temp_directory_path() / "genret_acceptance").string();
  app.add_option("--work-dir", work_dir, "scratch directory for pipeline runs");
  CLI11_PARSE(app, argc, argv);
  const fs::path root(work_dir);
  fs::create_directories(root);

  fs::path data;
  pipeline::EvalReport e2e;
  const std::vector<std::pair<double, std::function<Outcome()>>> gates = {
      {30, criterion_gradients},
      {0, criterion_weight_law},
      {120, criterion_docid_invariants},
      {120, criterion_beam_oracle},
      {0, criterion_expansion_nesting},
      {60, criterion_metric_learning},
      {300,
       [&] {
         data = synthetic_data(root);
         return criterion_end_to_end(root, data, e2e);
       }},
      {0, [&] { return criterion_ablation(root, data); }},
      {0, criterion_zero_shot},
      {0, [&] { return criterion_determinism(root, data, e2e); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto& [budget, gate] = gates[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = gate();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget > 0 && seconds >= budget) {
      outcome.pass = false;
      outcome.detail += "; exceeded the " + fmt(budget, 3) + " s budget";
    }
    if (!outcome.pass) ++failures;
    std::cout << "criterion " << i + 1 << ": " << (outcome.pass ? "PASS" : "FAIL") << ' ' << outcome.detail << " ["
              << fmt(seconds, 3) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
