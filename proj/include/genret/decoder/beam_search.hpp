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

#include "genret/docid/trie.hpp"
#include "genret/error.hpp"

#include <algorithm>
#include <concepts>
#include <span>
#include <vector>

namespace genret::decoder {

/// Anything that scores next-token log-probabilities for a prefix.
template <typename S>
concept StepScorer = requires(const S& s, std::span<const docid::TokenValue> prefix,
                              std::span<const docid::TokenValue> candidates, std::span<double> out) {
  s.log_probs(prefix, candidates, out);
};

struct BeamHypothesis {
  docid::Prefix tokens;
  double log_prob = 0.0;  // <= 0
  docid::DocIdTrie::NodeId node = docid::DocIdTrie::kRoot;
};

struct BeamResult {
  docid::DocId docid;
  ItemId item = 0;
  double log_prob = 0.0;
};

/// Higher log-prob first; equal log-probs in lexicographic token order.
inline bool beam_before(double lp_a, std::span<const docid::TokenValue> a, double lp_b,
                        std::span<const docid::TokenValue> b) {
  if (lp_a != lp_b) return lp_a > lp_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Beam search restricted to trie paths. Returns up to `k` complete docIDs
/// ranked by total log-probability. Live hypotheses that can no longer reach
/// the current top k are dropped, which never changes the result because
/// extending a prefix cannot raise its log-probability. With
/// `beam_width >= trie.size()` the output equals exhaustive enumeration.
template <StepScorer Scorer>
std::vector<BeamResult> constrained_beam_search(const Scorer& scorer, const docid::DocIdTrie& trie,
                                                std::size_t beam_width, std::size_t k) {
  if (trie.empty()) throw DataError("constrained beam search over an empty index");
  if (k == 0 || beam_width < k) throw ConfigError("beam search needs beam_width >= k >= 1");

  auto before = [](const BeamHypothesis& a, const BeamHypothesis& b) {
    return beam_before(a.log_prob, a.tokens, b.log_prob, b.tokens);
  };
  std::vector<BeamHypothesis> live{BeamHypothesis{}};
  std::vector<BeamHypothesis> finished;
  std::vector<docid::TokenValue> values;
  std::vector<docid::DocIdTrie::NodeId> nodes;
  std::vector<double> scores;
  while (!live.empty()) {
    std::vector<BeamHypothesis> next;
    for (const auto& h : live) {
      const auto& children = trie.node(h.node).children;
      values.clear();
      nodes.clear();
      for (const auto& [value, child] : children) {
        values.push_back(value);
        nodes.push_back(child);
      }
      scores.assign(values.size(), 0.0);
      scorer.log_probs(std::span<const docid::TokenValue>(h.tokens), std::span<const docid::TokenValue>(values),
                       std::span<double>(scores));
      for (std::size_t i = 0; i < values.size(); ++i) {
        BeamHypothesis ext{h.tokens, h.log_prob + scores[i], nodes[i]};
        ext.tokens.push_back(values[i]);
        (trie.is_leaf(ext.node) ? finished : next).push_back(std::move(ext));
      }
    }
    std::sort(finished.begin(), finished.end(), before);
    if (finished.size() > k) finished.resize(k);
    std::sort(next.begin(), next.end(), before);
    if (next.size() > beam_width) next.resize(beam_width);
    if (finished.size() == k) {
      const double bar = finished.back().log_prob;
      std::erase_if(next, [bar](const BeamHypothesis& h) { return h.log_prob < bar; });
    }
    live = std::move(next);
  }

  std::vector<BeamResult> out;
  out.reserve(finished.size());
  for (const auto& h : finished) {
    const auto item = *trie.node(h.node).item;
    out.push_back({trie.docid_of(item), item, h.log_prob});
  }
  return out;
}

}  // namespace genret::decoder
