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
#include "genret/decoder/position_weights.hpp"
#include "genret/decoder/relevance.hpp"
#include "genret/docid/trie.hpp"
#include "genret/nn/attention.hpp"
#include "genret/nn/dense.hpp"
#include "genret/nn/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genret::decoder {

using nn::Tensor2;
using nn::Vector;

struct DecoderConfig {
  Eigen::Index d_k = 32;  // query token / context item embedding size
  Eigen::Index d_u = 16;
  Eigen::Index context_hidden = 128;
  Eigen::Index d_context = 64;
  Eigen::Index d_token = 32;
  Eigen::Index d_hidden = 128;
  Eigen::Index max_query_tokens = 8;
  Eigen::Index max_context_items = 4;
  Eigen::Index token_buckets = 4096;
  Eigen::Index user_buckets = 1024;

  void validate() const;
  nlohmann::json to_json() const;
  static DecoderConfig from_json(const nlohmann::json& j);
};

/// Raw decode request.
struct DecodeInput {
  std::string user_id;
  std::string query;
  std::vector<ItemId> context;
};

struct EncodedQuery {
  Eigen::Index user_bucket = 0;
  std::vector<Eigen::Index> query_tokens;   // at least one entry, 0 is padding
  std::vector<Eigen::Index> context_items;  // catalog indices, may be empty
};

/// Hashes query tokens and maps context items to indices in the sorted
/// `catalog_items`. Keeps the newest known context items; unknown ones are
/// skipped.
EncodedQuery encode_query(const DecoderConfig& config, std::span<const ItemId> catalog_items,
                          const DecodeInput& input);

/// Sorted token values allowed at each docID position.
class PositionVocab {
 public:
  PositionVocab() = default;
  explicit PositionVocab(std::vector<std::vector<TokenValue>> values);
  static PositionVocab from_trie(const docid::DocIdTrie& trie) { return PositionVocab(trie.position_values()); }

  std::size_t positions() const { return values_.size(); }
  std::size_t size(std::size_t position) const { return values_.at(position).size(); }
  std::optional<Eigen::Index> index_of(std::size_t position, TokenValue value) const;
  TokenValue value(std::size_t position, Eigen::Index index) const {
    return values_.at(position).at(static_cast<std::size_t>(index));
  }
  const std::vector<std::vector<TokenValue>>& values() const { return values_; }

 private:
  std::vector<std::vector<TokenValue>> values_;
};

/// One teacher-forcing example: an encoded request and its target docID.
struct DecoderSample {
  EncodedQuery query;
  docid::DocId target;
};

/// Teacher-forced per-position statistics gathered while computing the loss.
struct TokenStats {
  std::vector<std::size_t> correct;
  std::vector<std::size_t> total;
  void add(const TokenStats& other);
  std::vector<double> accuracy() const;
};

/// Compact autoregressive docID generator. A context encoder (user
/// embedding plus attention-pooled query tokens and context items, then an
/// MLP) produces a context vector; each step feeds it together with the
/// prefix summary (position embedding plus the sum of position-qualified
/// token embeddings) through one hidden layer into a position-specific
/// softmax over that position's vocabulary.
class DecoderModel {
 public:
  DecoderModel(const DecoderConfig& config, PositionVocab vocab, std::vector<ItemId> catalog_items,
               std::uint64_t seed);

  const DecoderConfig& config() const { return config_; }
  const PositionVocab& vocab() const { return vocab_; }
  std::size_t max_positions() const { return vocab_.positions(); }

  EncodedQuery encode(const DecodeInput& input) const;
  Vector context_vector(const EncodedQuery& q) const;

  /// Logits over vocab(prefix.size()) given the context vector and prefix.
  /// Throws DataError when a prefix token is outside its position vocabulary.
  Vector step_logits(const Vector& context, std::span<const TokenValue> prefix) const;
  Vector step_log_probs(const Vector& context, std::span<const TokenValue> prefix) const;

  /// Teacher-forced position weights for each sample, with y-hat_t the
  /// argmax among the trie children of the target prefix.
  std::vector<std::vector<double>> position_weights(std::span<const DecoderSample> batch,
                                                    const docid::DocIdTrie& trie, const RelevanceOracle& oracle,
                                                    const PositionWeightConfig& config) const;

  /// Mean over the batch of sum_t w_t CE_t with the given constant weights.
  double weighted_loss(std::span<const DecoderSample> batch, const std::vector<std::vector<double>>& weights,
                       bool accumulate_grad, TokenStats* stats = nullptr);

  /// Position-aware loss: weights computed from the current model, then
  /// treated as constants.
  double position_aware_loss(std::span<const DecoderSample> batch, const docid::DocIdTrie& trie,
                             const RelevanceOracle& oracle, const PositionWeightConfig& config, bool accumulate_grad,
                             TokenStats* stats = nullptr);

  nn::ParameterList parameters();

  void save(const std::filesystem::path& path);
  static DecoderModel load(const std::filesystem::path& path);

 private:
  struct ContextCache;
  /// Per-sample weights given that sample's teacher-forced logits.
  using WeightFn = std::function<std::vector<double>(std::size_t sample, const std::vector<Vector>& logits)>;

  Vector context_forward(const EncodedQuery& q, ContextCache* cache) const;
  void context_backward(const EncodedQuery& q, const ContextCache& cache, std::size_t sample, const Vector& d_input);
  double batch_loss(std::span<const DecoderSample> batch, const WeightFn& weight_fn, bool accumulate_grad,
                    TokenStats* stats);
  Eigen::Index vocab_index(std::size_t position, TokenValue value) const;

  DecoderConfig config_;
  PositionVocab vocab_;
  std::vector<ItemId> catalog_items_;

  nn::Parameter user_table_;
  nn::Parameter query_token_table_;
  nn::Parameter context_item_table_;
  nn::Parameter no_history_;
  nn::Parameter query_pool_;
  nn::Parameter context_pool_;
  nn::DenseNet context_net_;
  std::vector<nn::Parameter> token_embeddings_;  // one table per position
  nn::Parameter position_embeddings_;
  nn::DenseNet step_net_;
  std::vector<nn::DenseNet> output_heads_;  // one per position
};

/// Binds a model to one request so beam search can query step log-probs.
class BoundDecoder {
 public:
  BoundDecoder(const DecoderModel& model, const EncodedQuery& query)
      : model_(&model), context_(model.context_vector(query)) {}

  void log_probs(std::span<const TokenValue> prefix, std::span<const TokenValue> candidates,
                 std::span<double> out) const;

 private:
  const DecoderModel* model_;
  Vector context_;
};

struct DecoderTrainConfig {
  nn::TrainLoopConfig loop;
  PositionWeightConfig weights;
};

struct DecoderTrainResult {
  DecoderModel model;
  nn::TrainLog log;
  std::vector<std::vector<double>> token_accuracy;  // per epoch, per position
};

/// Builds a model over the trie's vocabulary and trains it on `samples`.
/// Throws DataError when a target docID is not in the trie.
DecoderTrainResult train_decoder(std::span<const DecoderSample> samples, const docid::DocIdTrie& trie,
                                 const RelevanceOracle& oracle, const DecoderConfig& config,
                                 std::vector<ItemId> catalog_items, const DecoderTrainConfig& train);

}  // namespace genret::decoder
