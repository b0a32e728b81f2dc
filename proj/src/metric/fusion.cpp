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

#include "genret/metric/fusion.hpp"

#include "genret/error.hpp"
#include "genret/nn/checkpoint.hpp"

#include <fstream>

namespace genret::metric {

void FusionConfig::validate() const {
  if (d_atomic <= 0 || d <= 0 || hidden < 0) throw ConfigError("fusion: dimensions must be positive");
  if (!(margin >= 0)) throw ConfigError("fusion: margin must be non-negative");
  if (cap_per_pv < 1) throw ConfigError("fusion: cap_per_pv must be at least 1");
}

nlohmann::json FusionConfig::to_json() const {
  return {{"d_atomic", d_atomic},
          {"d", d},
          {"hidden", hidden},
          {"hidden_activation", std::string(nn::to_string(hidden_activation))},
          {"margin", margin},
          {"cap_per_pv", cap_per_pv},
          {"normalize", normalize}};
}

FusionConfig FusionConfig::from_json(const nlohmann::json& j) {
  FusionConfig c;
  c.d_atomic = j.value("d_atomic", c.d_atomic);
  c.d = j.value("d", c.d);
  c.hidden = j.value("hidden", c.hidden);
  c.hidden_activation = nn::parse_activation(j.value("hidden_activation", std::string("tanh")));
  c.margin = j.value("margin", c.margin);
  c.cap_per_pv = j.value("cap_per_pv", c.cap_per_pv);
  c.normalize = j.value("normalize", c.normalize);
  c.validate();
  return c;
}

FusionModel::FusionModel(const FusionConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  nn::Rng rng(seed);
  const Eigen::Index in = 3 * config_.d_atomic;
  if (config_.hidden == 0) {
    net_ = nn::DenseNet("fusion", {in, config_.d}, {nn::Activation::identity}, rng);
  } else {
    net_ = nn::DenseNet("fusion", {in, config_.hidden, config_.d},
                        {config_.hidden_activation, nn::Activation::identity}, rng);
  }
}

Vector fusion_input(const repr::AtomicEmbeddings& a) {
  Vector x(a.common.size() + a.efficient.size() + a.semantic.size());
  x << a.common, a.efficient, a.semantic;
  return x;
}

Vector FusionModel::fuse(const repr::AtomicEmbeddings& atomic) const {
  if (atomic.common.size() != config_.d_atomic || atomic.efficient.size() != config_.d_atomic ||
      atomic.semantic.size() != config_.d_atomic) {
    throw DimensionError("fuse: atomic embedding sizes do not match d_atomic=" + std::to_string(config_.d_atomic));
  }
  Vector out = net_.forward(fusion_input(atomic));
  if (config_.normalize) out = repr::l2_normalize(out, "fusion embedding");
  return out;
}

void FusionModel::save(const std::filesystem::path& path) {
  nn::save_checkpoint(path, parameters(), {{"model", "fusion"}, {"config", config_.to_json()}});
}

FusionModel FusionModel::load(const std::filesystem::path& path) {
  const auto meta = nn::read_checkpoint_meta(path);
  if (meta.value("model", "") != "fusion") throw LoadError(path.string() + ": not a fusion checkpoint");
  FusionModel model(FusionConfig::from_json(meta.at("config")), 0);
  nn::load_checkpoint(path, model.parameters());
  return model;
}

std::vector<Triplet> mine_triplets(std::span<const PageView> pvs, std::size_t cap_per_pv, std::uint64_t seed) {
  if (cap_per_pv < 1) throw ConfigError("mine_triplets: cap_per_pv must be at least 1");
  nn::Rng rng(seed);
  std::vector<Triplet> out;
  std::vector<Triplet> candidates;
  for (const auto& pv : pvs) {
    candidates.clear();
    const auto& e = pv.entries;
    for (std::size_t a = 0; a < e.size(); ++a) {
      for (std::size_t p = 0; p < e.size(); ++p) {
        if (p == a || e[p].label != e[a].label || e[p].item == e[a].item) continue;
        for (std::size_t n = 0; n < e.size(); ++n) {
          if (e[n].label == e[a].label) continue;
          candidates.push_back({pv.id, e[a].item, e[p].item, e[n].item});
        }
      }
    }
    // Partial Fisher-Yates: the first `take` slots are a uniform sample.
    const std::size_t take = std::min(cap_per_pv, candidates.size());
    for (std::size_t i = 0; i < take && candidates.size() > cap_per_pv; ++i) {
      std::swap(candidates[i], candidates[i + nn::uniform_index(rng, candidates.size() - i)]);
    }
    out.insert(out.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

double triplet_loss(const Vector& a, const Vector& p, const Vector& n, double margin) {
  return std::max(0.0, margin + (a - p).norm() - (a - n).norm());
}

double triplet_loss_grad(const Vector& a, const Vector& p, const Vector& n, double margin, Vector& d_a,
                         Vector& d_p, Vector& d_n) {
  const Vector ap = a - p;
  const Vector an = a - n;
  const double dp = ap.norm();
  const double dn = an.norm();
  const double loss = margin + dp - dn;
  if (loss <= 0.0) return 0.0;
  // The distance gradient at coincident points is taken as zero.
  const Vector up = dp > 1e-12 ? Vector(ap / dp) : Vector::Zero(a.size());
  const Vector un = dn > 1e-12 ? Vector(an / dn) : Vector::Zero(a.size());
  d_a += up - un;
  d_p -= up;
  d_n += un;
  return loss;
}

namespace {

struct Forward {
  nn::DenseNet::Cache cache;
  Vector raw;
  Vector out;
};

Forward forward(const FusionModel& model, const repr::AtomicEmbeddings& atomic) {
  Forward f;
  f.raw = model.net().forward(fusion_input(atomic), &f.cache);
  f.out = model.config().normalize ? repr::l2_normalize(f.raw, "fusion embedding") : f.raw;
  return f;
}

void backward(FusionModel& model, const Forward& f, const Vector& d_out) {
  Vector d_raw = d_out;
  if (model.config().normalize) {
    const double norm = f.raw.norm();
    d_raw = (d_out - d_out.dot(f.out) * f.out) / norm;
  }
  model.net().backward(f.cache, d_raw);
}

const repr::AtomicEmbeddings& lookup(const repr::AtomicTable& atomic, ItemId id) {
  auto it = atomic.find(id);
  if (it == atomic.end()) throw IndexError("no atomic embedding for item " + std::to_string(id));
  return it->second;
}

double batch_loss(FusionModel& model, const repr::AtomicTable& atomic, std::span<const Triplet> triplets,
                  std::span<const std::size_t> idx, bool grad) {
  const double scale = 1.0 / static_cast<double>(idx.size());
  const Eigen::Index d = model.config().d;
  double total = 0.0;
  for (auto i : idx) {
    const auto& t = triplets[i];
    const Forward a = forward(model, lookup(atomic, t.anchor));
    const Forward p = forward(model, lookup(atomic, t.positive));
    const Forward n = forward(model, lookup(atomic, t.negative));
    Vector da = Vector::Zero(d), dp = Vector::Zero(d), dn = Vector::Zero(d);
    total += triplet_loss_grad(a.out, p.out, n.out, model.config().margin, da, dp, dn);
    if (grad) {
      backward(model, a, scale * da);
      backward(model, p, scale * dp);
      backward(model, n, scale * dn);
    }
  }
  return total * scale;
}

}  // namespace

double mean_triplet_loss(const FusionModel& model, const repr::AtomicTable& atomic,
                         std::span<const Triplet> triplets) {
  if (triplets.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : triplets) {
    total += triplet_loss(model.fuse(lookup(atomic, t.anchor)), model.fuse(lookup(atomic, t.positive)),
                          model.fuse(lookup(atomic, t.negative)), model.config().margin);
  }
  return total / static_cast<double>(triplets.size());
}

MetricTrainResult train_metric(const repr::AtomicTable& atomic, std::span<const PageView> pvs,
                               const FusionConfig& config, const nn::TrainLoopConfig& train) {
  const auto triplets = mine_triplets(pvs, config.cap_per_pv, train.seed);
  if (triplets.empty()) throw ConfigError("train_metric: no page view contains both click labels");
  for (const auto& t : triplets) {
    lookup(atomic, t.anchor);
    lookup(atomic, t.positive);
    lookup(atomic, t.negative);
  }
  MetricTrainResult result{FusionModel(config, train.seed), {}, triplets.size()};
  auto& model = result.model;
  result.log = nn::run_training(model.parameters(), triplets.size(), train,
                                [&](std::span<const std::size_t> idx, bool grad) {
                                  return batch_loss(model, atomic, triplets, idx, grad);
                                });
  return result;
}

FusionTable fuse_all(const FusionModel& model, const repr::AtomicTable& atomic) {
  FusionTable out;
  for (const auto& [id, a] : atomic) out.emplace(id, model.fuse(a));
  return out;
}

void write_fusion_jsonl(const std::filesystem::path& path, const FusionTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [id, v] : table) {
    out << nlohmann::json{{"item_id", id}, {"fusion", std::vector<double>(v.data(), v.data() + v.size())}}.dump()
        << '\n';
  }
}

FusionTable read_fusion_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  FusionTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto v = j.at("fusion").get<std::vector<double>>();
      table[j.at("item_id").get<ItemId>()] = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return table;
}

}  // namespace genret::metric
