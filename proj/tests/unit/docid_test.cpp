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

#include "genret/docid/builder.hpp"
#include "genret/docid/kmeans.hpp"
#include "genret/docid/trie.hpp"
#include "genret/error.hpp"
#include "test_support.hpp"

#include <fstream>
#include <set>

namespace genret::docid {
namespace {

Vector scalar(double x) {
  Vector v(1);
  v(0) = x;
  return v;
}

std::vector<Vector> random_points(std::size_t n, Eigen::Index d, nn::Rng& rng) {
  std::vector<Vector> pts;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = nn::uniform(rng, -1.0, 1.0);
    pts.push_back(v);
  }
  return pts;
}

// Catalog-shaped inputs: the given number of random items per leaf path.
struct BuildInputs {
  std::map<ItemId, Vector> embeddings;
  std::map<ItemId, double> scores;
  std::map<ItemId, CategoryPath> paths;
};

BuildInputs random_inputs(const std::vector<std::pair<CategoryPath, std::size_t>>& leaves, std::uint64_t seed) {
  BuildInputs in;
  nn::Rng rng(seed);
  ItemId id = 1;
  for (const auto& [path, count] : leaves) {
    for (std::size_t i = 0; i < count; ++i, ++id) {
      Vector v(3);
      for (Eigen::Index j = 0; j < 3; ++j) v(j) = nn::uniform(rng, -1.0, 1.0);
      in.embeddings[id] = v;
      in.scores[id] = nn::uniform(rng, 0.0, 1.0);
      in.paths[id] = path;
    }
  }
  return in;
}

TEST(DocIdText, ParseAndFormat) {
  const DocId d({2, 202, 3, 7}, 2);
  EXPECT_EQ(d.to_string(), "2-202-3-7");
  EXPECT_EQ(DocId::parse("2-202-3-7", 2), d);
  EXPECT_EQ(DocId::parse("2-202-3-7", 2).semantic_len(), 2U);
  EXPECT_THROW(DocId::parse("2--3", 1), DataError);
  EXPECT_THROW(DocId::parse("", 0), DataError);
  EXPECT_THROW(DocId::parse("a-1", 0), DataError);
  EXPECT_NE(d.token(0), d.token(1));
  EXPECT_NE((Token{0, 3}), (Token{2, 3}));
}

TEST(KMeans, SeparatesWellSeparatedPoints) {
  const std::vector<Vector> pts = {scalar(0.0), scalar(0.1), scalar(10.0), scalar(10.1)};
  const auto r = kmeans(pts, 2, 1);
  EXPECT_EQ(r.assignments[0], r.assignments[1]);
  EXPECT_EQ(r.assignments[2], r.assignments[3]);
  EXPECT_NE(r.assignments[0], r.assignments[2]);
}

TEST(KMeans, SingleClusterCentroidIsMean) {
  nn::Rng rng(2);
  const auto pts = random_points(20, 3, rng);
  const auto r = kmeans(pts, 1, 1);
  Vector mean = Vector::Zero(3);
  for (const auto& p : pts) mean += p;
  mean /= 20.0;
  EXPECT_LT((r.centroids[0] - mean).cwiseAbs().maxCoeff(), 1e-12);
  for (auto a : r.assignments) EXPECT_EQ(a, 0U);
}

TEST(KMeans, BeatsRandomAssignments) {
  nn::Rng rng(3);
  const auto pts = random_points(50, 2, rng);
  const auto r = kmeans(pts, 3, 5);
  EXPECT_NEAR(r.inertia, inertia(pts, r.assignments, r.centroids), 1e-9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> assign(pts.size());
    std::vector<Vector> centroids(3, Vector::Zero(2));
    std::vector<double> counts(3, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      assign[i] = nn::uniform_index(rng, 3);
      centroids[assign[i]] += pts[i];
      counts[assign[i]] += 1;
    }
    for (std::size_t c = 0; c < 3; ++c) {
      if (counts[c] > 0) centroids[c] /= counts[c];
    }
    EXPECT_LE(r.inertia, inertia(pts, assign, centroids) + 1e-12);
  }
}

TEST(KMeans, SizesNonIncreasingAndDeterministic) {
  nn::Rng rng(4);
  const auto pts = random_points(60, 3, rng);
  const auto a = kmeans(pts, 5, 9);
  const auto b = kmeans(pts, 5, 9);
  EXPECT_EQ(a.assignments, b.assignments);
  for (std::size_t c = 1; c < a.sizes.size(); ++c) EXPECT_GE(a.sizes[c - 1], a.sizes[c]);
  std::vector<std::size_t> counted(5, 0);
  for (auto x : a.assignments) ++counted[x];
  EXPECT_EQ(counted, a.sizes);
}

TEST(KMeans, MoreClustersThanPoints) {
  const std::vector<Vector> pts = {scalar(1), scalar(2), scalar(3)};
  const auto r = kmeans(pts, 5, 1);
  EXPECT_EQ(std::set<std::size_t>(r.assignments.begin(), r.assignments.end()).size(), 3U);
  EXPECT_EQ(r.non_empty(), 3U);
  EXPECT_EQ(r.sizes[3], 0U);
  EXPECT_THROW(kmeans(pts, 0, 1), ConfigError);
}

TEST(Hierarchical, SmallNodeEnumeratesByScore) {
  nn::Rng rng(5);
  const auto pts = random_points(5, 2, rng);
  const std::vector<double> scores = {0.1, 0.9, 0.5, 0.9, 0.3};
  const std::vector<ItemId> ids = {10, 14, 12, 11, 13};
  const auto r = hierarchical_cluster(pts, 10, 100, 4, 1, scores, ids);
  // Descending score, ties by ascending id: 11, 14, 12, 13, 10.
  const std::vector<Prefix> want = {{4}, {1}, {2}, {0}, {3}};
  EXPECT_EQ(r.tokens, want);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Hierarchical, LargeNodeSplits) {
  nn::Rng rng(6);
  const auto pts = random_points(250, 3, rng);
  const auto r = hierarchical_cluster(pts, 10, 100, 4, 1);
  std::set<Prefix> unique(r.tokens.begin(), r.tokens.end());
  EXPECT_EQ(unique.size(), 250U);
  for (const auto& t : r.tokens) EXPECT_GE(t.size(), 2U);
  std::map<Prefix, std::size_t> leaf_groups;
  for (const auto& t : r.tokens) ++leaf_groups[Prefix(t.begin(), t.end() - 1)];
  for (const auto& [p, n] : leaf_groups) EXPECT_LE(n, 100U);
}

TEST(Hierarchical, IdenticalPointsFallBackToOrdinals) {
  const std::vector<Vector> pts(12, scalar(1.0));
  const auto r = hierarchical_cluster(pts, 4, 5, 3, 1);
  std::set<Prefix> unique(r.tokens.begin(), r.tokens.end());
  EXPECT_EQ(unique.size(), 12U);
  EXPECT_FALSE(r.warnings.empty());
  for (const auto& t : r.tokens) EXPECT_EQ(t.size(), 1U);
}

TEST(Hierarchical, DepthBudgetExhaustionWarns) {
  nn::Rng rng(7);
  const auto pts = random_points(40, 2, rng);
  const auto r = hierarchical_cluster(pts, 2, 3, 1, 1);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_EQ(std::set<Prefix>(r.tokens.begin(), r.tokens.end()).size(), 40U);
}

// Independent E oracle: for every prefix deeper than the semantic layer,
// average the scores of the items whose docID starts with it.
std::map<Prefix, double> brute_force_e(const std::map<ItemId, DocId>& docids, const std::map<ItemId, double>& scores) {
  std::map<Prefix, std::pair<double, int>> acc;
  for (const auto& [id, d] : docids) {
    for (std::size_t len = d.semantic_len() + 1; len <= d.size(); ++len) {
      auto& [sum, n] = acc[Prefix(d.values().begin(), d.values().begin() + static_cast<std::ptrdiff_t>(len))];
      sum += scores.at(id);
      ++n;
    }
  }
  std::map<Prefix, double> out;
  for (const auto& [p, sn] : acc) out[p] = sn.first / sn.second;
  return out;
}

TEST(BuildDocIds, CategoryGuidedInvariants) {
  const auto in = random_inputs({{{1, 101}, 40}, {{1, 102}, 7}, {{2, 201}, 1}, {{2, 202}, 25}}, 8);
  DocIdBuildConfig cfg;
  cfg.k = 4;
  cfg.max_cluster_size = 8;
  const auto build = build_docids(in.embeddings, in.scores, in.paths, cfg);
  ASSERT_EQ(build.docids.size(), in.embeddings.size());

  std::set<DocId> unique;
  for (const auto& [id, d] : build.docids) {
    unique.insert(d);
    const auto& path = in.paths.at(id);
    ASSERT_EQ(d.semantic_len(), path.size());
    for (std::size_t t = 0; t < path.size(); ++t) EXPECT_EQ(d[t], path[t]);
    for (std::size_t t = path.size(); t < d.size(); ++t) {
      EXPECT_GE(d[t], 0);
      EXPECT_LT(d[t], static_cast<TokenValue>(std::max(cfg.k, cfg.max_cluster_size)));
    }
  }
  EXPECT_EQ(unique.size(), build.docids.size());

  // Single-item category: path ++ (0, 0).
  EXPECT_EQ(build.docids.at(48), DocId({2, 201, 0, 0}, 2));

  const auto want = brute_force_e(build.docids, in.scores);
  ASSERT_EQ(build.node_scores.size(), want.size());
  for (const auto& [prefix, e] : want) EXPECT_NEAR(build.node_scores.at(prefix), e, 1e-12) << prefix_to_string(prefix);

  // Every cluster node either has at most CS leaves below it or has children
  // that are themselves clusters.
  const auto trie = DocIdTrie::build(build.docids, build.node_scores);
  for (const auto& [prefix, e] : build.node_scores) {
    const auto node = trie.find(prefix);
    ASSERT_TRUE(node);
    const auto& n = trie.node(*node);
    if (n.item || n.children.empty()) continue;
    const bool ordinal_layer = trie.is_leaf(n.children.begin()->second);
    if (ordinal_layer) {
      EXPECT_LE(n.children.size(), cfg.max_cluster_size);
    }
  }

  const auto again = build_docids(in.embeddings, in.scores, in.paths, cfg);
  EXPECT_EQ(again.docids, build.docids);
  EXPECT_EQ(again.node_scores, build.node_scores);
}

TEST(BuildDocIds, LayoutMatchesCategoryThenClusterThenOrdinal) {
  // One item in clothing (2) / dress (202) among enough siblings to split.
  const auto in = random_inputs({{{2, 202}, 30}}, 9);
  DocIdBuildConfig cfg;
  cfg.k = 4;
  cfg.max_cluster_size = 8;
  const auto build = build_docids(in.embeddings, in.scores, in.paths, cfg);
  for (const auto& [id, d] : build.docids) {
    ASSERT_GE(d.size(), 4U);
    EXPECT_EQ(d[0], 2);
    EXPECT_EQ(d[1], 202);
    EXPECT_EQ(d.to_string().rfind("2-202-", 0), 0U);
  }
}

TEST(BuildDocIds, ClusterScoreIsMemberMean) {
  BuildInputs in;
  in.embeddings = {{1, scalar(0.0)}, {2, scalar(0.01)}};
  in.scores = {{1, 0.2}, {2, 0.4}};
  in.paths = {{1, {5}}, {2, {5}}};
  DocIdBuildConfig cfg;
  cfg.k = 1;
  cfg.max_cluster_size = 8;
  const auto build = build_docids(in.embeddings, in.scores, in.paths, cfg);
  EXPECT_NEAR(build.node_scores.at(Prefix{5, 0}), 0.3, 1e-12);
  // Ordinals follow descending score.
  EXPECT_EQ(build.docids.at(2), DocId({5, 0, 0}, 1));
  EXPECT_EQ(build.docids.at(1), DocId({5, 0, 1}, 1));
}

TEST(BuildDocIds, DistinctLeavesDifferInSemanticLayer) {
  const auto in = random_inputs({{{1, 11}, 10}, {{1, 12}, 10}, {{3, 11}, 10}}, 10);
  DocIdBuildConfig cfg;
  cfg.k = 3;
  cfg.max_cluster_size = 4;
  const auto build = build_docids(in.embeddings, in.scores, in.paths, cfg);
  for (const auto& [a, da] : build.docids) {
    for (const auto& [b, db] : build.docids) {
      const auto sa = std::vector<TokenValue>(da.values().begin(), da.values().begin() + 2);
      const auto sb = std::vector<TokenValue>(db.values().begin(), db.values().begin() + 2);
      EXPECT_EQ(sa == sb, in.paths.at(a) == in.paths.at(b));
    }
  }
}

TEST(BuildDocIds, MissingInputsListed) {
  auto in = random_inputs({{{1, 11}, 4}}, 11);
  in.scores.erase(2);
  in.paths.erase(3);
  try {
    build_docids(in.embeddings, in.scores, in.paths, {});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('2'), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
}

TEST(BuildDocIds, UnguidedHasNoSemanticLayer) {
  const auto in = random_inputs({{{1, 11}, 15}, {{1, 12}, 15}}, 12);
  DocIdBuildConfig cfg;
  cfg.k = 3;
  cfg.max_cluster_size = 4;
  cfg.category_guided = false;
  const auto build = build_docids(in.embeddings, in.scores, in.paths, cfg);
  std::set<DocId> unique;
  for (const auto& [id, d] : build.docids) {
    EXPECT_EQ(d.semantic_len(), 0U);
    unique.insert(d);
  }
  EXPECT_EQ(unique.size(), 30U);
  EXPECT_EQ(build.node_scores, mean_scores_by_prefix(build.docids, in.scores));
}

TEST(Trie, SingleDocIdIsChain) {
  const std::map<ItemId, DocId> docids = {{7, DocId({1, 0, 0}, 1)}};
  const NodeScores scores = {{{1, 0}, 0.5}, {{1, 0, 0}, 0.5}};
  const auto trie = DocIdTrie::build(docids, scores);
  EXPECT_EQ(trie.node_count(), 4U);
  EXPECT_EQ(trie.lookup(docids.at(7)), 7);
  EXPECT_EQ(trie.max_length(), 3U);
  EXPECT_DOUBLE_EQ(trie.score(*trie.find(Prefix{1, 0})), 0.5);
  EXPECT_THROW(trie.score(*trie.find(Prefix{1})), IndexError);
  EXPECT_THROW(trie.docid_of(8), IndexError);
}

TEST(Trie, BranchesAfterSharedSemanticPrefix) {
  const std::map<ItemId, DocId> docids = {{1, DocId({4, 0, 0}, 1)}, {2, DocId({4, 1, 0}, 1)}};
  const NodeScores scores = {{{4, 0}, 0.1}, {{4, 0, 0}, 0.1}, {{4, 1}, 0.2}, {{4, 1, 0}, 0.2}};
  const auto trie = DocIdTrie::build(docids, scores);
  const auto root_child = trie.find(Prefix{4});
  ASSERT_TRUE(root_child);
  EXPECT_EQ(trie.node(*root_child).children.size(), 2U);
  EXPECT_EQ(trie.node(DocIdTrie::kRoot).children.size(), 1U);
  EXPECT_EQ(trie.items_under(*root_child), (std::vector<ItemId>{1, 2}));
}

TEST(Trie, RejectsInvalidSets) {
  const NodeScores scores = {{{4, 0}, 0.1}, {{4, 0, 0}, 0.1}};
  EXPECT_THROW(DocIdTrie::build({{1, DocId({4, 0, 0}, 1)}, {2, DocId({4, 0, 0}, 1)}}, scores), DataError);
  EXPECT_THROW(DocIdTrie::build({{1, DocId({4, 0, 0}, 1)}, {2, DocId({4, 0}, 1)}}, scores), DataError);
  EXPECT_THROW(DocIdTrie::build({{1, DocId({4, 0, 0}, 1)}}, {}), DataError);
}

TEST(Trie, EnumerationEqualsInputForRandomBuilds) {
  const auto in = random_inputs({{{1, 11}, 80}, {{1, 12}, 60}, {{2, 21}, 60}}, 13);
  DocIdBuildConfig cfg;
  cfg.k = 4;
  cfg.max_cluster_size = 8;
  const auto build = build_docids(in.embeddings, in.scores, in.paths, cfg);
  const auto trie = DocIdTrie::build(build.docids, build.node_scores);
  std::map<ItemId, DocId> got;
  for (const auto& [d, item] : trie.enumerate()) got.emplace(item, d);
  EXPECT_EQ(got, build.docids);
  for (const auto& [item, d] : build.docids) EXPECT_EQ(trie.lookup(d), item);
  const auto pv = trie.position_values();
  for (const auto& [item, d] : build.docids) {
    for (std::size_t t = 0; t < d.size(); ++t) EXPECT_TRUE(std::binary_search(pv[t].begin(), pv[t].end(), d[t]));
  }
}

TEST(IndexFile, RoundTripIsExact) {
  testing::TempDir dir;
  const auto in = random_inputs({{{1, 11}, 30}, {{2, 21}, 12}}, 14);
  DocIdBuildConfig cfg;
  cfg.k = 3;
  cfg.max_cluster_size = 5;
  const auto build = build_docids(in.embeddings, in.scores, in.paths, cfg);
  const auto trie = DocIdTrie::build(build.docids, build.node_scores);
  save_index(dir / "index.json", trie);
  const auto loaded = load_index(dir / "index.json");
  EXPECT_EQ(loaded.enumerate(), trie.enumerate());
  EXPECT_EQ(loaded.node_scores(), trie.node_scores());
  for (const auto& [item, d] : trie.docids()) EXPECT_EQ(loaded.docid_of(item).semantic_len(), d.semantic_len());
}

TEST(IndexFile, RejectsTruncatedAndNewerFiles) {
  testing::TempDir dir;
  const auto in = random_inputs({{{1, 11}, 10}}, 15);
  DocIdBuildConfig cfg;
  cfg.k = 2;
  cfg.max_cluster_size = 4;
  const auto build = build_docids(in.embeddings, in.scores, in.paths, cfg);
  save_index(dir / "index.json", DocIdTrie::build(build.docids, build.node_scores));

  std::ifstream f(dir / "index.json");
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  {
    std::ofstream out(dir / "truncated.json");
    out << text.substr(0, text.size() / 2);
  }
  try {
    load_index(dir / "truncated.json");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
  }

  auto j = nlohmann::json::parse(text);
  j["version"] = kIndexVersion + 1;
  {
    std::ofstream out(dir / "newer.json");
    out << j.dump();
  }
  EXPECT_THROW(load_index(dir / "newer.json"), LoadError);
  EXPECT_THROW(load_index(dir / "missing.json"), LoadError);
}

}  // namespace
}  // namespace genret::docid
