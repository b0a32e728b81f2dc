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
#include "genret/nn/attention.hpp"
#include "genret/nn/dense.hpp"
#include "genret/nn/tensor.hpp"
#include "genret/nn/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace genret::repr {

using nn::Tensor2;
using nn::Vector;

struct TwoTowerConfig {
  Eigen::Index d_k = 16;        // query/context token embedding size
  Eigen::Index d_u = 16;        // user embedding size
  Eigen::Index d_e = 32;        // tower output size
  Eigen::Index d_atomic = 32;   // semantic/common/efficient embedding size
  Eigen::Index query_len = 4;   // d_q
  Eigen::Index context_len = 4; // d_c
  Eigen::Index user_hidden = 64;
  Eigen::Index head_hidden = 64;
  Eigen::Index token_buckets = 4096;
  Eigen::Index user_buckets = 1024;
  double temperature = 0.2;
  double click_weight = 1.0;  // w_c
  nn::Activation hidden_activation = nn::Activation::tanh;

  void validate() const;
  nlohmann::json to_json() const;
  static TwoTowerConfig from_json(const nlohmann::json& j);
};

/// The three per-item vectors produced by the item tower.
struct AtomicEmbeddings {
  Vector semantic;
  Vector common;
  Vector efficient;
};

/// Embedded user-side inputs of one sample: x_u (1 x d_u), x_q (d_q x d_k), x_c (d_c x d_k).
struct UserInputs {
  Tensor2 user;
  Tensor2 query;
  Tensor2 context;
};

/// Ids of one training sample after hashing and catalog lookup.
struct EncodedSample {
  Eigen::Index user_bucket = 0;
  std::vector<Eigen::Index> query_tokens;   // exactly d_q entries, 0 is padding
  std::vector<Eigen::Index> context_items;  // catalog indices, at most d_c
  std::size_t item_index = 0;
  int relevance = 0;
  int click = 0;
};

struct HeadOutputs {
  std::vector<double> relevance_cosine;
  std::vector<double> click_cosine;
  std::vector<double> relevance_prob;
  std::vector<double> click_prob;
};

/// Multi-task two-tower model: a user tower with self- and query-attention
/// over the context sequence, and an item tower whose relevance and click
/// heads share the common (item-id) embedding.
class TwoTowerModel {
 public:
  TwoTowerModel(const TwoTowerConfig& config, const Catalog& catalog, std::uint64_t seed);

  const TwoTowerConfig& config() const { return config_; }
  std::size_t catalog_size() const { return item_ids_.size(); }

  EncodedSample encode(const DatasetRow& row, const Catalog& catalog) const;
  UserInputs embed_user(const EncodedSample& sample) const;

  /// x_u rows and per-sample x_q / x_c sequences -> U (B x d_e).
  Tensor2 user_tower(const Tensor2& x_u, std::span<const Tensor2> x_q, std::span<const Tensor2> x_c) const;

  AtomicEmbeddings atomic(std::size_t item_index) const;

  /// Cosines and probabilities sigmoid(cos / tau) of both heads. Throws
  /// NumericError naming the tower when a vector has zero norm.
  HeadOutputs item_heads(std::span<const AtomicEmbeddings> atomic, const Tensor2& user) const;

  /// Mean L1 over `batch`; accumulates gradients when asked.
  double loss(std::span<const EncodedSample> batch, bool accumulate_grad);

  nn::ParameterList parameters();

  void save(const std::filesystem::path& path);
  static TwoTowerModel load(const std::filesystem::path& path, const Catalog& catalog);

 private:
  struct SampleCache;
  double forward_sample(const EncodedSample& s, SampleCache* cache) const;
  void backward_sample(const EncodedSample& s, SampleCache& cache, double scale);
  Vector efficiency_input(std::size_t item_index) const;
  Vector semantic_embedding(std::size_t item_index) const;

  TwoTowerConfig config_;
  std::vector<ItemId> item_ids_;
  std::vector<std::vector<Eigen::Index>> title_tokens_;
  Tensor2 efficiency_features_;  // standardized, one row per item
  Vector feature_mean_;
  Vector feature_std_;

  nn::Parameter user_table_;
  nn::Parameter query_token_table_;
  nn::Parameter context_item_table_;
  nn::Parameter no_history_;
  nn::DenseNet user_mlp_;
  nn::Parameter semantic_token_table_;
  nn::Parameter item_common_table_;
  nn::DenseNet efficiency_net_;
  nn::DenseNet relevance_head_;
  nn::DenseNet click_head_;
};

/// Multi-task objective: mean over the batch of BCE(y_r, p_r) + w_c BCE(y_c, p_c).
double embed_loss(std::span<const double> relevance_prob, std::span<const double> click_prob,
                  std::span<const int> relevance, std::span<const int> click, double click_weight);

/// Unit-norm copy. Throws NumericError naming `what` on a zero-norm vector.
Vector l2_normalize(const Vector& v, const char* what);

struct EmbeddingTrainResult {
  TwoTowerModel model;
  nn::TrainLog log;
};

/// Trains on every row (labels as given). Throws DataError on an empty
/// dataset and NumericError on a non-finite loss.
EmbeddingTrainResult train_embedding(std::span<const DatasetRow> rows, const Catalog& catalog,
                                     const TwoTowerConfig& config, const nn::TrainLoopConfig& train);

using AtomicTable = std::map<ItemId, AtomicEmbeddings>;

/// One record per requested item. Throws IndexError for items the model does not know.
AtomicTable export_atomic_embeddings(const TwoTowerModel& model, std::span<const ItemId> items,
                                     const Catalog& catalog);

/// JSONL {item_id, semantic, common, efficient}.
void write_atomic_jsonl(const std::filesystem::path& path, const AtomicTable& table);
AtomicTable read_atomic_jsonl(const std::filesystem::path& path);

}  // namespace genret::repr
