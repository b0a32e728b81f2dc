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

#include "genret/repr/two_tower.hpp"

#include "genret/error.hpp"
#include "genret/nn/checkpoint.hpp"
#include "genret/nn/loss.hpp"

#include <fstream>

namespace genret::repr {

namespace {

constexpr Eigen::Index kEfficiencyFeatures = 3;

}  // namespace

void TwoTowerConfig::validate() const {
  auto positive = [](Eigen::Index v, const char* name) {
    if (v <= 0) throw ConfigError(std::string("two-tower: ") + name + " must be positive");
  };
  positive(d_k, "d_k");
  positive(d_u, "d_u");
  positive(d_e, "d_e");
  positive(d_atomic, "d_atomic");
  positive(query_len, "query_len");
  positive(context_len, "context_len");
  positive(user_hidden, "user_hidden");
  positive(head_hidden, "head_hidden");
  if (token_buckets < 2) throw ConfigError("two-tower: token_buckets must be at least 2");
  positive(user_buckets, "user_buckets");
  if (!(temperature > 0)) throw ConfigError("two-tower: temperature must be positive");
  if (!(click_weight >= 0)) throw ConfigError("two-tower: click weight w_c must be non-negative");
}

nlohmann::json TwoTowerConfig::to_json() const {
  return {{"d_k", d_k},
          {"d_u", d_u},
          {"d_e", d_e},
          {"d_atomic", d_atomic},
          {"query_len", query_len},
          {"context_len", context_len},
          {"user_hidden", user_hidden},
          {"head_hidden", head_hidden},
          {"token_buckets", token_buckets},
          {"user_buckets", user_buckets},
          {"temperature", temperature},
          {"click_weight", click_weight},
          {"hidden_activation", std::string(nn::to_string(hidden_activation))}};
}

TwoTowerConfig TwoTowerConfig::from_json(const nlohmann::json& j) {
  TwoTowerConfig c;
  c.d_k = j.value("d_k", c.d_k);
  c.d_u = j.value("d_u", c.d_u);
  c.d_e = j.value("d_e", c.d_e);
  c.d_atomic = j.value("d_atomic", c.d_atomic);
  c.query_len = j.value("query_len", c.query_len);
  c.context_len = j.value("context_len", c.context_len);
  c.user_hidden = j.value("user_hidden", c.user_hidden);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  c.token_buckets = j.value("token_buckets", c.token_buckets);
  c.user_buckets = j.value("user_buckets", c.user_buckets);
  c.temperature = j.value("temperature", c.temperature);
  c.click_weight = j.value("click_weight", c.click_weight);
  c.hidden_activation = nn::parse_activation(j.value("hidden_activation", std::string("tanh")));
  c.validate();
  return c;
}

Vector l2_normalize(const Vector& v, const char* what) {
  const double n = v.norm();
  if (!(n > 1e-12)) throw NumericError(std::string("zero-norm vector in ") + what);
  return v / n;
}

double embed_loss(std::span<const double> relevance_prob, std::span<const double> click_prob,
                  std::span<const int> relevance, std::span<const int> click, double click_weight) {
  const std::size_t b = relevance_prob.size();
  if (click_prob.size() != b || relevance.size() != b || click.size() != b) {
    throw DimensionError("embed_loss: batch fields are not aligned");
  }
  if (b == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    total += nn::binary_cross_entropy(relevance_prob[i], relevance[i]) +
             click_weight * nn::binary_cross_entropy(click_prob[i], click[i]);
  }
  return total / static_cast<double>(b);
}

struct TwoTowerModel::SampleCache {
  UserInputs in;
  nn::AttentionCache self_attention;
  nn::AttentionCache query_attention;
  nn::DenseNet::Cache user_mlp;
  Vector user;
  nn::DenseNet::Cache efficiency;
  nn::DenseNet::Cache relevance;
  nn::DenseNet::Cache click;
  Vector relevance_out;
  Vector click_out;
  double relevance_cos = 0.0;
  double click_cos = 0.0;
  double relevance_prob = 0.0;
  double click_prob = 0.0;
};

TwoTowerModel::TwoTowerModel(const TwoTowerConfig& config, const Catalog& catalog, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  if (catalog.empty()) throw DataError("two-tower: catalog is empty");
  nn::Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(catalog.size());

  efficiency_features_.resize(n, kEfficiencyFeatures);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Item& item = catalog[static_cast<std::size_t>(i)];
    item_ids_.push_back(item.id);
    std::vector<Eigen::Index> tokens;
    for (const auto& t : tokenize(item.title)) tokens.push_back(token_bucket(t, config_.token_buckets));
    title_tokens_.push_back(std::move(tokens));
    efficiency_features_.row(i) << item.ctr, std::log1p(std::max(0.0, item.click_count)),
        std::log1p(std::max(0.0, item.pay_count));
  }
  feature_mean_ = efficiency_features_.colwise().mean();
  feature_std_ = ((efficiency_features_.rowwise() - feature_mean_).array().square().colwise().mean()).sqrt();
  for (Eigen::Index c = 0; c < feature_std_.size(); ++c) {
    if (!(feature_std_(c) > 1e-12)) feature_std_(c) = 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    efficiency_features_.row(i) =
        (efficiency_features_.row(i) - feature_mean_).array() / feature_std_.array();
  }

  const auto act = config_.hidden_activation;
  user_table_ = nn::Parameter("embed.user_table", nn::glorot_uniform(config_.user_buckets, config_.d_u, rng));
  query_token_table_ =
      nn::Parameter("embed.query_tokens", nn::glorot_uniform(config_.token_buckets, config_.d_k, rng));
  context_item_table_ = nn::Parameter("embed.context_items", nn::glorot_uniform(n, config_.d_k, rng));
  no_history_ = nn::Parameter("embed.no_history", nn::glorot_uniform(1, config_.d_k, rng));
  const Eigen::Index user_in = config_.d_u + (config_.context_len + config_.query_len) * config_.d_k;
  user_mlp_ = nn::DenseNet("embed.user_mlp", {user_in, config_.user_hidden, config_.d_e},
                           {act, nn::Activation::identity}, rng);
  semantic_token_table_ =
      nn::Parameter("embed.semantic_tokens", nn::glorot_uniform(config_.token_buckets, config_.d_atomic, rng));
  item_common_table_ = nn::Parameter("embed.item_common", nn::glorot_uniform(n, config_.d_atomic, rng));
  efficiency_net_ = nn::DenseNet("embed.efficiency", {kEfficiencyFeatures, config_.d_atomic}, {act}, rng);
  relevance_head_ = nn::DenseNet("embed.relevance_head", {2 * config_.d_atomic, config_.head_hidden, config_.d_e},
                                 {act, nn::Activation::identity}, rng);
  click_head_ = nn::DenseNet("embed.click_head", {2 * config_.d_atomic, config_.head_hidden, config_.d_e},
                             {act, nn::Activation::identity}, rng);
}

nn::ParameterList TwoTowerModel::parameters() {
  nn::ParameterList out = {&user_table_, &query_token_table_, &context_item_table_, &no_history_};
  for (auto* p : user_mlp_.parameters()) out.push_back(p);
  out.push_back(&semantic_token_table_);
  out.push_back(&item_common_table_);
  for (auto* p : efficiency_net_.parameters()) out.push_back(p);
  for (auto* p : relevance_head_.parameters()) out.push_back(p);
  for (auto* p : click_head_.parameters()) out.push_back(p);
  return out;
}

EncodedSample TwoTowerModel::encode(const DatasetRow& row, const Catalog& catalog) const {
  EncodedSample s;
  s.user_bucket = static_cast<Eigen::Index>(fnv1a(row.user_id) % static_cast<std::uint64_t>(config_.user_buckets));
  for (const auto& t : tokenize(row.query)) {
    if (static_cast<Eigen::Index>(s.query_tokens.size()) == config_.query_len) break;
    s.query_tokens.push_back(token_bucket(t, config_.token_buckets));
  }
  s.query_tokens.resize(static_cast<std::size_t>(config_.query_len), 0);
  // Most recent events last; keep the newest d_c known items.
  for (auto it = row.context.rbegin(); it != row.context.rend(); ++it) {
    if (static_cast<Eigen::Index>(s.context_items.size()) == config_.context_len) break;
    if (auto idx = catalog.index_of(it->item)) s.context_items.insert(s.context_items.begin(), static_cast<Eigen::Index>(*idx));
  }
  const auto idx = catalog.index_of(row.target);
  if (!idx || *idx >= item_ids_.size() || item_ids_[*idx] != row.target) {
    throw IndexError("two-tower: unknown target item " + std::to_string(row.target));
  }
  s.item_index = *idx;
  s.relevance = row.relevance;
  s.click = row.click;
  return s;
}

UserInputs TwoTowerModel::embed_user(const EncodedSample& s) const {
  UserInputs in;
  in.user = user_table_.value.row(s.user_bucket);
  in.query.resize(config_.query_len, config_.d_k);
  for (Eigen::Index r = 0; r < config_.query_len; ++r) {
    in.query.row(r) = query_token_table_.value.row(s.query_tokens.at(static_cast<std::size_t>(r)));
  }
  in.context.resize(config_.context_len, config_.d_k);
  for (Eigen::Index r = 0; r < config_.context_len; ++r) {
    in.context.row(r) = r < static_cast<Eigen::Index>(s.context_items.size())
                            ? context_item_table_.value.row(s.context_items[static_cast<std::size_t>(r)])
                            : no_history_.value.row(0);
  }
  return in;
}

Tensor2 TwoTowerModel::user_tower(const Tensor2& x_u, std::span<const Tensor2> x_q,
                                  std::span<const Tensor2> x_c) const {
  const Eigen::Index b = x_u.rows();
  nn::require_cols(x_u, config_.d_u, "user tower x_u");
  if (static_cast<Eigen::Index>(x_q.size()) != b || static_cast<Eigen::Index>(x_c.size()) != b) {
    throw DimensionError("user tower: batch sizes of x_u, x_q, x_c differ");
  }
  Tensor2 out(b, config_.d_e);
  for (Eigen::Index i = 0; i < b; ++i) {
    nn::require_shape(x_q[static_cast<std::size_t>(i)], config_.query_len, config_.d_k, "user tower x_q");
    nn::require_shape(x_c[static_cast<std::size_t>(i)], config_.context_len, config_.d_k, "user tower x_c");
    const auto& c = x_c[static_cast<std::size_t>(i)];
    const Tensor2 self = nn::attention(c, c, c, config_.d_k);
    const Tensor2 query = nn::attention(x_q[static_cast<std::size_t>(i)], c, c, config_.d_k);
    const Tensor2 user_row = x_u.row(i);
    const Tensor2 self_flat = nn::flatten(self);
    const Tensor2 query_flat = nn::flatten(query);
    out.row(i) = user_mlp_.forward(nn::hconcat({&user_row, &self_flat, &query_flat}));
  }
  return out;
}

Vector TwoTowerModel::semantic_embedding(std::size_t item_index) const {
  const auto& tokens = title_tokens_[item_index];
  if (tokens.empty()) return semantic_token_table_.value.row(0);
  Vector sum = Vector::Zero(config_.d_atomic);
  for (auto t : tokens) sum += semantic_token_table_.value.row(t);
  return sum / static_cast<double>(tokens.size());
}

Vector TwoTowerModel::efficiency_input(std::size_t item_index) const {
  return efficiency_features_.row(static_cast<Eigen::Index>(item_index));
}

AtomicEmbeddings TwoTowerModel::atomic(std::size_t item_index) const {
  if (item_index >= item_ids_.size()) throw IndexError("two-tower: item index out of range");
  AtomicEmbeddings a;
  a.semantic = semantic_embedding(item_index);
  a.common = item_common_table_.value.row(static_cast<Eigen::Index>(item_index));
  a.efficient = efficiency_net_.forward(efficiency_input(item_index));
  return a;
}

HeadOutputs TwoTowerModel::item_heads(std::span<const AtomicEmbeddings> atomic, const Tensor2& user) const {
  if (static_cast<Eigen::Index>(atomic.size()) != user.rows()) {
    throw DimensionError("item heads: atomic batch and U row counts differ");
  }
  nn::require_cols(user, config_.d_e, "item heads U");
  HeadOutputs out;
  for (std::size_t i = 0; i < atomic.size(); ++i) {
    const Vector u = l2_normalize(user.row(static_cast<Eigen::Index>(i)), "user tower");
    const Tensor2 s = atomic[i].semantic, c = atomic[i].common, e = atomic[i].efficient;
    const Vector r = l2_normalize(relevance_head_.forward(nn::hconcat({&s, &c})), "relevance head");
    const Vector k = l2_normalize(click_head_.forward(nn::hconcat({&e, &c})), "click head");
    out.relevance_cosine.push_back(u.dot(r));
    out.click_cosine.push_back(u.dot(k));
    out.relevance_prob.push_back(nn::sigmoid(out.relevance_cosine.back() / config_.temperature));
    out.click_prob.push_back(nn::sigmoid(out.click_cosine.back() / config_.temperature));
  }
  return out;
}

double TwoTowerModel::forward_sample(const EncodedSample& s, SampleCache* cache) const {
  SampleCache local;
  SampleCache& c = cache ? *cache : local;
  c.in = embed_user(s);
  const Tensor2 self = nn::attention(c.in.context, c.in.context, c.in.context, config_.d_k, &c.self_attention);
  const Tensor2 query = nn::attention(c.in.query, c.in.context, c.in.context, config_.d_k, &c.query_attention);
  const Tensor2 self_flat = nn::flatten(self);
  const Tensor2 query_flat = nn::flatten(query);
  c.user = user_mlp_.forward(nn::hconcat({&c.in.user, &self_flat, &query_flat}), &c.user_mlp);

  const Tensor2 sem = semantic_embedding(s.item_index);
  const Tensor2 common = item_common_table_.value.row(static_cast<Eigen::Index>(s.item_index));
  const Tensor2 eff = efficiency_net_.forward(efficiency_input(s.item_index), &c.efficiency);
  c.relevance_out = relevance_head_.forward(nn::hconcat({&sem, &common}), &c.relevance);
  c.click_out = click_head_.forward(nn::hconcat({&eff, &common}), &c.click);

  const Vector u = l2_normalize(c.user, "user tower");
  c.relevance_cos = u.dot(l2_normalize(c.relevance_out, "relevance head"));
  c.click_cos = u.dot(l2_normalize(c.click_out, "click head"));
  c.relevance_prob = nn::sigmoid(c.relevance_cos / config_.temperature);
  c.click_prob = nn::sigmoid(c.click_cos / config_.temperature);
  return nn::binary_cross_entropy(c.relevance_prob, s.relevance) +
         config_.click_weight * nn::binary_cross_entropy(c.click_prob, s.click);
}

void TwoTowerModel::backward_sample(const EncodedSample& s, SampleCache& c, double scale) {
  const double tau = config_.temperature;
  const double d_rcos = scale * nn::binary_cross_entropy_grad(c.relevance_prob, s.relevance) *
                        c.relevance_prob * (1.0 - c.relevance_prob) / tau;
  const double d_ccos = scale * config_.click_weight * nn::binary_cross_entropy_grad(c.click_prob, s.click) *
                        c.click_prob * (1.0 - c.click_prob) / tau;

  const double un = c.user.norm(), rn = c.relevance_out.norm(), kn = c.click_out.norm();
  const Vector uh = c.user / un, rh = c.relevance_out / rn, kh = c.click_out / kn;
  const Vector d_user = (d_rcos * (rh - c.relevance_cos * uh) + d_ccos * (kh - c.click_cos * uh)) / un;
  const Vector d_rel = d_rcos * (uh - c.relevance_cos * rh) / rn;
  const Vector d_click = d_ccos * (uh - c.click_cos * kh) / kn;

  const Eigen::Index da = config_.d_atomic;
  const Tensor2 d_rel_in = relevance_head_.backward(c.relevance, d_rel);
  const Tensor2 d_click_in = click_head_.backward(c.click, d_click);
  const auto item = static_cast<Eigen::Index>(s.item_index);
  item_common_table_.grad.row(item) += d_rel_in.rightCols(da) + d_click_in.rightCols(da);
  efficiency_net_.backward(c.efficiency, d_click_in.leftCols(da));
  const auto& tokens = title_tokens_[s.item_index];
  if (tokens.empty()) {
    semantic_token_table_.grad.row(0) += d_rel_in.leftCols(da);
  } else {
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (auto t : tokens) semantic_token_table_.grad.row(t) += inv * d_rel_in.leftCols(da);
  }

  const Tensor2 d_user_in = user_mlp_.backward(c.user_mlp, d_user);
  const Eigen::Index dk = config_.d_k, dc = config_.context_len, dq = config_.query_len;
  user_table_.grad.row(s.user_bucket) += d_user_in.leftCols(config_.d_u);
  const Tensor2 d_self = Eigen::Map<const Tensor2>(d_user_in.data() + config_.d_u, dc, dk);
  const Tensor2 d_query = Eigen::Map<const Tensor2>(d_user_in.data() + config_.d_u + dc * dk, dq, dk);
  const auto gs = nn::attention_backward(c.self_attention, d_self);
  const auto gq = nn::attention_backward(c.query_attention, d_query);
  const Tensor2 d_context = gs.queries + gs.keys + gs.values + gq.keys + gq.values;
  for (Eigen::Index r = 0; r < dq; ++r) {
    query_token_table_.grad.row(s.query_tokens[static_cast<std::size_t>(r)]) += gq.queries.row(r);
  }
  for (Eigen::Index r = 0; r < dc; ++r) {
    if (r < static_cast<Eigen::Index>(s.context_items.size())) {
      context_item_table_.grad.row(s.context_items[static_cast<std::size_t>(r)]) += d_context.row(r);
    } else {
      no_history_.grad.row(0) += d_context.row(r);
    }
  }
}

double TwoTowerModel::loss(std::span<const EncodedSample> batch, bool accumulate_grad) {
  if (batch.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  SampleCache cache;
  for (const auto& s : batch) {
    total += forward_sample(s, &cache);
    if (accumulate_grad) backward_sample(s, cache, scale);
  }
  return total * scale;
}

void TwoTowerModel::save(const std::filesystem::path& path) {
  nlohmann::json meta = {{"model", "two-tower"}, {"config", config_.to_json()}, {"item_ids", item_ids_}};
  nn::save_checkpoint(path, parameters(), meta);
}

TwoTowerModel TwoTowerModel::load(const std::filesystem::path& path, const Catalog& catalog) {
  const auto meta = nn::read_checkpoint_meta(path);
  if (meta.value("model", "") != "two-tower") throw LoadError(path.string() + ": not a two-tower checkpoint");
  TwoTowerModel model(TwoTowerConfig::from_json(meta.at("config")), catalog, 0);
  if (meta.at("item_ids").get<std::vector<ItemId>>() != model.item_ids_) {
    throw LoadError(path.string() + ": checkpoint was trained on a different catalog");
  }
  nn::load_checkpoint(path, model.parameters());
  return model;
}

EmbeddingTrainResult train_embedding(std::span<const DatasetRow> rows, const Catalog& catalog,
                                     const TwoTowerConfig& config, const nn::TrainLoopConfig& train) {
  if (rows.empty()) throw DataError("train_embedding: dataset is empty");
  EmbeddingTrainResult result{TwoTowerModel(config, catalog, train.seed), {}};
  auto& model = result.model;
  std::vector<EncodedSample> samples;
  samples.reserve(rows.size());
  for (const auto& r : rows) samples.push_back(model.encode(r, catalog));

  std::vector<EncodedSample> batch;
  result.log = nn::run_training(model.parameters(), samples.size(), train,
                                [&](std::span<const std::size_t> idx, bool grad) {
                                  batch.clear();
                                  for (auto i : idx) batch.push_back(samples[i]);
                                  return model.loss(batch, grad);
                                });
  return result;
}

AtomicTable export_atomic_embeddings(const TwoTowerModel& model, std::span<const ItemId> items,
                                     const Catalog& catalog) {
  AtomicTable table;
  for (ItemId id : items) {
    const auto idx = catalog.index_of(id);
    if (!idx || *idx >= model.catalog_size()) {
      throw IndexError("export_atomic_embeddings: unknown item id " + std::to_string(id));
    }
    table.emplace(id, model.atomic(*idx));
  }
  return table;
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

void write_atomic_jsonl(const std::filesystem::path& path, const AtomicTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [id, a] : table) {
    out << nlohmann::json{{"item_id", id},
                          {"semantic", to_std(a.semantic)},
                          {"common", to_std(a.common)},
                          {"efficient", to_std(a.efficient)}}
               .dump()
        << '\n';
  }
}

AtomicTable read_atomic_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  AtomicTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      table[j.at("item_id").get<ItemId>()] = {from_std(j.at("semantic").get<std::vector<double>>()),
                                               from_std(j.at("common").get<std::vector<double>>()),
                                               from_std(j.at("efficient").get<std::vector<double>>())};
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return table;
}

}  // namespace genret::repr
