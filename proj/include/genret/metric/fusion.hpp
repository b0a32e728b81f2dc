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
#include "genret/nn/dense.hpp"
#include "genret/nn/trainer.hpp"
#include "genret/repr/two_tower.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace genret::metric {

using nn::Vector;

struct FusionConfig {
  Eigen::Index d_atomic = 32;
  Eigen::Index d = 64;       // fusion embedding size
  Eigen::Index hidden = 64;  // 0 means a single linear layer 3*d_atomic -> d
  nn::Activation hidden_activation = nn::Activation::tanh;
  double margin = 0.1;
  std::size_t cap_per_pv = 20;
  bool normalize = false;  // L2-normalize I_a before distances

  void validate() const;
  nlohmann::json to_json() const;
  static FusionConfig from_json(const nlohmann::json& j);
};

/// MLP over concat(common, efficient, semantic).
class FusionModel {
 public:
  FusionModel(const FusionConfig& config, std::uint64_t seed);

  const FusionConfig& config() const { return config_; }
  nn::DenseNet& net() { return net_; }
  const nn::DenseNet& net() const { return net_; }
  nn::ParameterList parameters() { return net_.parameters(); }

  /// Throws DimensionError when the atomic sizes do not match the input layer.
  Vector fuse(const repr::AtomicEmbeddings& atomic) const;

  void save(const std::filesystem::path& path);
  static FusionModel load(const std::filesystem::path& path);

 private:
  FusionConfig config_;
  nn::DenseNet net_;
};

Vector fusion_input(const repr::AtomicEmbeddings& atomic);

struct Triplet {
  std::string pv_id;
  ItemId anchor = 0;
  ItemId positive = 0;
  ItemId negative = 0;
};

/// Every (anchor, positive, negative) inside one page view with
/// label(positive) == label(anchor) != label(negative) and positive != anchor,
/// sampled without replacement down to `cap_per_pv` per page.
std::vector<Triplet> mine_triplets(std::span<const PageView> pvs, std::size_t cap_per_pv, std::uint64_t seed);

/// max(0, m + |a - p| - |a - n|) with Euclidean distances.
double triplet_loss(const Vector& a, const Vector& p, const Vector& n, double margin);

/// Same value; adds dL/da, dL/dp, dL/dn into the outputs.
double triplet_loss_grad(const Vector& a, const Vector& p, const Vector& n, double margin, Vector& d_a,
                         Vector& d_p, Vector& d_n);

using FusionTable = std::map<ItemId, Vector>;

struct MetricTrainResult {
  FusionModel model;
  nn::TrainLog log;
  std::size_t triplet_count = 0;
};

/// Trains the fusion MLP on frozen atomic embeddings. Throws ConfigError when
/// no page view yields a triplet and IndexError for page-view items missing
/// from the atomic table.
MetricTrainResult train_metric(const repr::AtomicTable& atomic, std::span<const PageView> pvs,
                               const FusionConfig& config, const nn::TrainLoopConfig& train);

/// Mean triplet loss of `model` over `triplets`.
double mean_triplet_loss(const FusionModel& model, const repr::AtomicTable& atomic,
                         std::span<const Triplet> triplets);

FusionTable fuse_all(const FusionModel& model, const repr::AtomicTable& atomic);

/// JSONL {item_id, fusion}.
void write_fusion_jsonl(const std::filesystem::path& path, const FusionTable& table);
FusionTable read_fusion_jsonl(const std::filesystem::path& path);

}  // namespace genret::metric
