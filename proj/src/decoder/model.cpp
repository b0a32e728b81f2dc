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

#include "genret/decoder/model.hpp"

#include "genret/error.hpp"
#include "genret/nn/checkpoint.hpp"
#include "genret/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace genret::decoder {

void DecoderConfig::validate() const {
  auto positive = [](Eigen::Index v, const char* name) {
    if (v <= 0) throw ConfigError(std::string("decoder: ") + name + " must be positive");
  };
  positive(d_k, "d_k");
  positive(d_u, "d_u");
  positive(context_hidden, "context_hidden");
  positive(d_context, "d_context");
  positive(d_token, "d_token");
  positive(d_hidden, "d_hidden");
  positive(max_query_tokens, "max_query_tokens");
  positive(max_context_items, "max_context_items");
  if (token_buckets < 2) throw ConfigError("decoder: token_buckets must be at least 2");
  positive(user_buckets, "user_buckets");
}

nlohmann::json DecoderConfig::to_json() const {
  return {{"d_k", d_k},
          {"d_u", d_u},
          {"context_hidden", context_hidden},
          {"d_context", d_context},
          {"d_token", d_token},
          {"d_hidden", d_hidden},
          {"max_query_tokens", max_query_tokens},
          {"max_context_items", max_context_items},
          {"token_buckets", token_buckets},
          {"user_buckets", user_buckets}};
}

DecoderConfig DecoderConfig::from_json(const nlohmann::json& j) {
  DecoderConfig c;
  c.d_k = j.value("d_k", c.d_k);
  c.d_u = j.value("d_u", c.d_u);
  c.context_hidden = j.value("context_hidden", c.context_hidden);
  c.d_context = j.value("d_context", c.d_context);
  c.d_token = j.value("d_token", c.d_token);
  c.d_hidden = j.value("d_hidden", c.d_hidden);
  c.max_query_tokens = j.value("max_query_tokens", c.max_query_tokens);
  c.max_context_items = j.value("max_context_items", c.max_context_items);
  c.token_buckets = j.value("token_buckets", c.token_buckets);
  c.user_buckets = j.value("user_buckets", c.user_buckets);
  c.validate();
  return c;
}

PositionVocab::PositionVocab(std::vector<std::vector<TokenValue>> values) : values_(std::move(values)) {
  for (auto& v : values_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.empty()) throw DataError("position vocabulary has an empty position");
  }
}

std::optional<Eigen::Index> PositionVocab::index_of(std::size_t position, TokenValue value) const {
  if (position >= values_.size()) return std::nullopt;
  const auto& v = values_[position];
  auto it = std::lower_bound(v.begin(), v.end(), value);
  if (it == v.end() || *it != value) return std::nullopt;
  return static_cast<Eigen::Index>(it - v.begin());
}

void TokenStats::add(const TokenStats& other) {
  if (correct.size() < other.correct.size()) {
    correct.resize(other.correct.size(), 0);
    total.resize(other.total.size(), 0);
  }
  for (std::size_t t = 0; t < other.correct.size(); ++t) {
    correct[t] += other.correct[t];
    total[t] += other.total[t];
  }
}

std::vector<double> TokenStats::accuracy() const {
  std::vector<double> out(total.size(), 0.0);
  for (std::size_t t = 0; t < total.size(); ++t) {
    if (total[t] > 0) out[t] = static_cast<double>(correct[t]) / static_cast<double>(total[t]);
  }
  return out;
}

EncodedQuery encode_query(const DecoderConfig& config, std::span<const ItemId> catalog_items,
                          const DecodeInput& input) {
  EncodedQuery q;
  q.user_bucket =
      static_cast<Eigen::Index>(fnv1a(input.user_id) % static_cast<std::uint64_t>(config.user_buckets));
  for (const auto& t : tokenize(input.query)) {
    if (static_cast<Eigen::Index>(q.query_tokens.size()) == config.max_query_tokens) break;
    q.query_tokens.push_back(token_bucket(t, config.token_buckets));
  }
  if (q.query_tokens.empty()) q.query_tokens.push_back(0);
  // Newest items are last.
  for (auto it = input.context.rbegin(); it != input.context.rend(); ++it) {
    if (static_cast<Eigen::Index>(q.context_items.size()) == config.max_context_items) break;
    auto pos = std::lower_bound(catalog_items.begin(), catalog_items.end(), *it);
    if (pos == catalog_items.end() || *pos != *it) continue;
    q.context_items.push_back(static_cast<Eigen::Index>(pos - catalog_items.begin()));
  }
  std::reverse(q.context_items.begin(), q.context_items.end());
  return q;
}

struct DecoderModel::ContextCache {
  nn::DenseNet::Cache net;
  std::vector<nn::AttentionCache> query_attention;
  std::vector<nn::AttentionCache> context_attention;
};

DecoderModel::DecoderModel(const DecoderConfig& config, PositionVocab vocab, std::vector<ItemId> catalog_items,
                           std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)), catalog_items_(std::move(catalog_items)) {
  config_.validate();
  if (vocab_.positions() == 0) throw DataError("decoder: empty docID vocabulary");
  std::sort(catalog_items_.begin(), catalog_items_.end());
  nn::Rng rng(seed);
  const auto n_items = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(catalog_items_.size()));
  user_table_ = nn::Parameter("decoder.user_table", nn::glorot_uniform(config_.user_buckets, config_.d_u, rng));
  query_token_table_ =
      nn::Parameter("decoder.query_tokens", nn::glorot_uniform(config_.token_buckets, config_.d_k, rng));
  context_item_table_ = nn::Parameter("decoder.context_items", nn::glorot_uniform(n_items, config_.d_k, rng));
  no_history_ = nn::Parameter("decoder.no_history", nn::glorot_uniform(1, config_.d_k, rng));
  query_pool_ = nn::Parameter("decoder.query_pool", nn::glorot_uniform(1, config_.d_k, rng));
  context_pool_ = nn::Parameter("decoder.context_pool", nn::glorot_uniform(1, config_.d_k, rng));
  context_net_ = nn::DenseNet("decoder.context_net",
                              {config_.d_u + 2 * config_.d_k, config_.context_hidden, config_.d_context},
                              {nn::Activation::tanh, nn::Activation::identity}, rng);
  const auto positions = static_cast<Eigen::Index>(vocab_.positions());
  for (std::size_t t = 0; t < vocab_.positions(); ++t) {
    token_embeddings_.emplace_back(
        "decoder.token_embedding" + std::to_string(t),
        nn::glorot_uniform(static_cast<Eigen::Index>(vocab_.size(t)), config_.d_token, rng));
  }
  position_embeddings_ =
      nn::Parameter("decoder.position_embedding", nn::glorot_uniform(positions, config_.d_token, rng));
  step_net_ = nn::DenseNet("decoder.step_net", {config_.d_context + config_.d_token, config_.d_hidden},
                           {nn::Activation::tanh}, rng);
  for (std::size_t t = 0; t < vocab_.positions(); ++t) {
    output_heads_.emplace_back("decoder.head" + std::to_string(t),
                               std::vector<Eigen::Index>{config_.d_hidden, static_cast<Eigen::Index>(vocab_.size(t))},
                               std::vector<nn::Activation>{nn::Activation::identity}, rng);
  }
}

nn::ParameterList DecoderModel::parameters() {
  nn::ParameterList out = {&user_table_, &query_token_table_, &context_item_table_,
                           &no_history_, &query_pool_,        &context_pool_};
  for (auto* p : context_net_.parameters()) out.push_back(p);
  for (auto& p : token_embeddings_) out.push_back(&p);
  out.push_back(&position_embeddings_);
  for (auto* p : step_net_.parameters()) out.push_back(p);
  for (auto& head : output_heads_) {
    for (auto* p : head.parameters()) out.push_back(p);
  }
  return out;
}

EncodedQuery DecoderModel::encode(const DecodeInput& input) const {
  return encode_query(config_, catalog_items_, input);
}

Vector DecoderModel::context_forward(const EncodedQuery& q, ContextCache* cache) const {
  const auto dk = config_.d_k;
  Tensor2 tokens(static_cast<Eigen::Index>(q.query_tokens.size()), dk);
  for (Eigen::Index r = 0; r < tokens.rows(); ++r) {
    tokens.row(r) = query_token_table_.value.row(q.query_tokens[static_cast<std::size_t>(r)]);
  }
  Tensor2 items;
  if (q.context_items.empty()) {
    items = no_history_.value;
  } else {
    items.resize(static_cast<Eigen::Index>(q.context_items.size()), dk);
    for (Eigen::Index r = 0; r < items.rows(); ++r) {
      items.row(r) = context_item_table_.value.row(q.context_items[static_cast<std::size_t>(r)]);
    }
  }
  nn::AttentionCache qa, ca;
  const Tensor2 pooled_q = nn::attention(query_pool_.value, tokens, tokens, dk, cache ? &qa : nullptr);
  const Tensor2 pooled_c = nn::attention(context_pool_.value, items, items, dk, cache ? &ca : nullptr);
  Tensor2 input(1, config_.d_u + 2 * dk);
  input << user_table_.value.row(q.user_bucket), pooled_q, pooled_c;
  if (cache) {
    cache->query_attention.push_back(std::move(qa));
    cache->context_attention.push_back(std::move(ca));
  }
  return input.row(0);
}

void DecoderModel::context_backward(const EncodedQuery& q, const ContextCache& cache, std::size_t sample,
                                    const Vector& d_input) {
  const auto dk = config_.d_k;
  user_table_.grad.row(q.user_bucket) += d_input.leftCols(config_.d_u);
  const auto gq = nn::attention_backward(cache.query_attention[sample], d_input.segment(config_.d_u, dk));
  query_pool_.grad += gq.queries;
  for (Eigen::Index r = 0; r < gq.keys.rows(); ++r) {
    query_token_table_.grad.row(q.query_tokens[static_cast<std::size_t>(r)]) += gq.keys.row(r) + gq.values.row(r);
  }
  const auto gc = nn::attention_backward(cache.context_attention[sample], d_input.rightCols(dk));
  context_pool_.grad += gc.queries;
  if (q.context_items.empty()) {
    no_history_.grad += gc.keys + gc.values;
  } else {
    for (Eigen::Index r = 0; r < gc.keys.rows(); ++r) {
      context_item_table_.grad.row(q.context_items[static_cast<std::size_t>(r)]) += gc.keys.row(r) + gc.values.row(r);
    }
  }
}

Vector DecoderModel::context_vector(const EncodedQuery& q) const {
  Tensor2 input = context_forward(q, nullptr);
  return context_net_.forward(input).row(0);
}

Eigen::Index DecoderModel::vocab_index(std::size_t position, TokenValue value) const {
  const auto idx = vocab_.index_of(position, value);
  if (!idx) {
    throw DataError("token " + std::to_string(value) + " is not in the vocabulary of position " +
                    std::to_string(position));
  }
  return *idx;
}

Vector DecoderModel::step_logits(const Vector& context, std::span<const TokenValue> prefix) const {
  const std::size_t t = prefix.size();
  if (t >= vocab_.positions()) {
    throw IndexError("prefix of length " + std::to_string(t) + " has no next position");
  }
  Vector summary = position_embeddings_.value.row(static_cast<Eigen::Index>(t));
  for (std::size_t j = 0; j < t; ++j) summary += token_embeddings_[j].value.row(vocab_index(j, prefix[j]));
  Tensor2 input(1, config_.d_context + config_.d_token);
  input << context, summary;
  return output_heads_[t].forward(step_net_.forward(input)).row(0);
}

Vector DecoderModel::step_log_probs(const Vector& context, std::span<const TokenValue> prefix) const {
  return nn::log_softmax(step_logits(context, prefix));
}

namespace {

// Greedy argmax over the trie children of `node`; ties go to the smaller value.
TokenValue best_child(const docid::DocIdTrie& trie, docid::DocIdTrie::NodeId node, const Vector& logits,
                      const PositionVocab& vocab, std::size_t position) {
  TokenValue best = 0;
  double best_logit = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& [value, child] : trie.node(node).children) {
    const auto idx = vocab.index_of(position, value);
    if (!idx) continue;
    const double l = logits(*idx);
    if (!found || l > best_logit) {
      best = value;
      best_logit = l;
      found = true;
    }
  }
  if (!found) throw DataError("trie node has no children in the position vocabulary");
  return best;
}

std::vector<double> sample_weights(const docid::DocId& target, const std::vector<Vector>& logits,
                                   const docid::DocIdTrie& trie, const PositionVocab& vocab,
                                   const RelevanceOracle& oracle, const PositionWeightConfig& config) {
  const std::size_t last = target.size() - 1;
  std::vector<double> w(target.size());
  auto node = docid::DocIdTrie::kRoot;
  for (std::size_t t = 0; t < target.size(); ++t) {
    TokenValue predicted = target[t];
    if (config.mode == LossMode::position_aware) predicted = best_child(trie, node, logits[t], vocab, t);
    const auto parent = node;
    auto efficiency = [&](TokenValue v) -> std::optional<double> {
      const auto c = trie.child(parent, v);
      if (!c) return std::nullopt;
      return trie.node(*c).score;
    };
    w[t] = position_weight(t, last, target.semantic_len(), target[t], predicted, efficiency, oracle, config).total;
    const auto next = trie.child(node, target[t]);
    if (!next) throw DataError("target docID " + target.to_string() + " is not in the index");
    node = *next;
  }
  return w;
}

}  // namespace

std::vector<std::vector<double>> DecoderModel::position_weights(std::span<const DecoderSample> batch,
                                                                const docid::DocIdTrie& trie,
                                                                const RelevanceOracle& oracle,
                                                                const PositionWeightConfig& config) const {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& s : batch) {
    const Vector ctx = context_vector(s.query);
    std::vector<Vector> logits;
    for (std::size_t t = 0; t < s.target.size(); ++t) {
      logits.push_back(step_logits(ctx, s.target.values().first(t)));
    }
    out.push_back(sample_weights(s.target, logits, trie, vocab_, oracle, config));
  }
  return out;
}

double DecoderModel::batch_loss(std::span<const DecoderSample> batch, const WeightFn& weight_fn,
                                bool accumulate_grad, TokenStats* stats) {
  if (batch.empty()) throw DataError("decoder: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const std::size_t positions = vocab_.positions();

  std::vector<std::vector<Eigen::Index>> targets(batch.size());
  std::size_t longest = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& y = batch[b].target;
    if (y.empty() || y.size() > positions) {
      throw DataError("target docID '" + y.to_string() + "' does not fit the decoder vocabulary");
    }
    for (std::size_t t = 0; t < y.size(); ++t) targets[b].push_back(vocab_index(t, y[t]));
    longest = std::max(longest, y.size());
  }

  ContextCache cc;
  Tensor2 ctx_in(n, config_.d_u + 2 * config_.d_k);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    ctx_in.row(static_cast<Eigen::Index>(b)) = context_forward(batch[b].query, &cc);
  }
  const Tensor2 ctx = context_net_.forward(ctx_in, &cc.net);

  // Position t covers the samples whose docIDs are longer than t.
  std::vector<std::vector<std::size_t>> rows(longest);
  std::vector<nn::DenseNet::Cache> step_caches(longest), head_caches(longest);
  std::vector<Tensor2> logits(longest);
  std::vector<std::vector<Vector>> sample_logits(batch.size());
  for (std::size_t t = 0; t < longest; ++t) {
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (batch[b].target.size() > t) rows[t].push_back(b);
    }
    Tensor2 x(static_cast<Eigen::Index>(rows[t].size()), config_.d_context + config_.d_token);
    for (std::size_t r = 0; r < rows[t].size(); ++r) {
      const auto b = rows[t][r];
      Vector summary = position_embeddings_.value.row(static_cast<Eigen::Index>(t));
      for (std::size_t j = 0; j < t; ++j) summary += token_embeddings_[j].value.row(targets[b][j]);
      x.row(static_cast<Eigen::Index>(r)) << ctx.row(static_cast<Eigen::Index>(b)), summary;
    }
    logits[t] = output_heads_[t].forward(step_net_.forward(x, &step_caches[t]), &head_caches[t]);
    for (std::size_t r = 0; r < rows[t].size(); ++r) {
      sample_logits[rows[t][r]].push_back(logits[t].row(static_cast<Eigen::Index>(r)));
    }
  }

  std::vector<std::vector<double>> weights(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    weights[b] = weight_fn(b, sample_logits[b]);
    if (weights[b].size() != batch[b].target.size()) {
      throw DimensionError("decoder: weight vector length differs from the target docID length");
    }
  }

  if (stats && stats->total.size() < positions) {
    stats->total.resize(positions, 0);
    stats->correct.resize(positions, 0);
  }
  double loss = 0.0;
  std::vector<Tensor2> d_logits(longest);
  for (std::size_t t = 0; t < longest; ++t) {
    d_logits[t] = Tensor2::Zero(logits[t].rows(), logits[t].cols());
    for (std::size_t r = 0; r < rows[t].size(); ++r) {
      const auto b = rows[t][r];
      const auto row = static_cast<Eigen::Index>(r);
      Vector d;
      const double ce = nn::softmax_cross_entropy(logits[t].row(row), targets[b][t], &d);
      loss += weights[b][t] * ce * inv_n;
      d_logits[t].row(row) = (weights[b][t] * inv_n) * d;
      if (stats) {
        Eigen::Index arg = 0;
        logits[t].row(row).maxCoeff(&arg);
        stats->total[t] += 1;
        if (arg == targets[b][t]) stats->correct[t] += 1;
      }
    }
  }
  if (!accumulate_grad) return loss;

  Tensor2 d_ctx = Tensor2::Zero(n, config_.d_context);
  for (std::size_t t = 0; t < longest; ++t) {
    const Tensor2 dh = output_heads_[t].backward(head_caches[t], d_logits[t]);
    const Tensor2 dx = step_net_.backward(step_caches[t], dh);
    for (std::size_t r = 0; r < rows[t].size(); ++r) {
      const auto b = rows[t][r];
      const auto row = static_cast<Eigen::Index>(r);
      d_ctx.row(static_cast<Eigen::Index>(b)) += dx.row(row).leftCols(config_.d_context);
      const Vector d_summary = dx.row(row).rightCols(config_.d_token);
      position_embeddings_.grad.row(static_cast<Eigen::Index>(t)) += d_summary;
      for (std::size_t j = 0; j < t; ++j) token_embeddings_[j].grad.row(targets[b][j]) += d_summary;
    }
  }
  const Tensor2 d_ctx_in = context_net_.backward(cc.net, d_ctx);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    context_backward(batch[b].query, cc, b, d_ctx_in.row(static_cast<Eigen::Index>(b)));
  }
  return loss;
}

double DecoderModel::weighted_loss(std::span<const DecoderSample> batch,
                                   const std::vector<std::vector<double>>& weights, bool accumulate_grad,
                                   TokenStats* stats) {
  if (weights.size() != batch.size()) throw DimensionError("decoder: one weight vector per sample required");
  return batch_loss(batch, [&](std::size_t b, const std::vector<Vector>&) { return weights[b]; }, accumulate_grad,
                    stats);
}

double DecoderModel::position_aware_loss(std::span<const DecoderSample> batch, const docid::DocIdTrie& trie,
                                         const RelevanceOracle& oracle, const PositionWeightConfig& config,
                                         bool accumulate_grad, TokenStats* stats) {
  return batch_loss(
      batch,
      [&](std::size_t b, const std::vector<Vector>& logits) {
        return sample_weights(batch[b].target, logits, trie, vocab_, oracle, config);
      },
      accumulate_grad, stats);
}

void DecoderModel::save(const std::filesystem::path& path) {
  const nlohmann::json meta = {{"kind", "decoder"},
                               {"config", config_.to_json()},
                               {"vocab", vocab_.values()},
                               {"catalog_items", catalog_items_}};
  nn::save_checkpoint(path, parameters(), meta);
}

DecoderModel DecoderModel::load(const std::filesystem::path& path) {
  const auto meta = nn::read_checkpoint_meta(path);
  try {
    if (meta.value("kind", std::string()) != "decoder") throw LoadError(path.string() + " is not a decoder checkpoint");
    DecoderModel model(DecoderConfig::from_json(meta.at("config")),
                       PositionVocab(meta.at("vocab").get<std::vector<std::vector<TokenValue>>>()),
                       meta.at("catalog_items").get<std::vector<ItemId>>(), 0);
    nn::load_checkpoint(path, model.parameters());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void BoundDecoder::log_probs(std::span<const TokenValue> prefix, std::span<const TokenValue> candidates,
                             std::span<double> out) const {
  const Vector lp = model_->step_log_probs(context_, prefix);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto idx = model_->vocab().index_of(prefix.size(), candidates[i]);
    if (!idx) throw DataError("candidate token outside the decoder vocabulary");
    out[i] = lp(*idx);
  }
}

DecoderTrainResult train_decoder(std::span<const DecoderSample> samples, const docid::DocIdTrie& trie,
                                 const RelevanceOracle& oracle, const DecoderConfig& config,
                                 std::vector<ItemId> catalog_items, const DecoderTrainConfig& train) {
  if (samples.empty()) throw DataError("decoder training needs at least one sample");
  train.weights.validate();
  for (const auto& s : samples) {
    if (!trie.lookup(s.target)) throw DataError("target docID " + s.target.to_string() + " is not in the index");
  }
  DecoderTrainResult result{DecoderModel(config, PositionVocab::from_trie(trie), std::move(catalog_items),
                                         train.loop.seed),
                            {}, {}};
  auto& model = result.model;
  TokenStats epoch_stats;
  std::vector<DecoderSample> batch;
  auto loss = [&](std::span<const std::size_t> idx, bool grad) {
    batch.clear();
    for (auto i : idx) batch.push_back(samples[i]);
    return model.position_aware_loss(batch, trie, oracle, train.weights, grad, grad ? &epoch_stats : nullptr);
  };
  auto hook = [&](std::size_t, double) {
    result.token_accuracy.push_back(epoch_stats.accuracy());
    epoch_stats = TokenStats{};
  };
  result.log = nn::run_training(model.parameters(), samples.size(), train.loop, loss, hook);
  return result;
}

}  // namespace genret::decoder
