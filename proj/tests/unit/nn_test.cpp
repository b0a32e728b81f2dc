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

#include "genret/error.hpp"
#include "genret/nn/adam.hpp"
#include "genret/nn/attention.hpp"
#include "genret/nn/checkpoint.hpp"
#include "genret/nn/dense.hpp"
#include "genret/nn/gradcheck.hpp"
#include "genret/nn/loss.hpp"
#include "genret/nn/trainer.hpp"
#include "test_support.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace genret::nn {
namespace {

Tensor2 random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Tensor2 m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -1.0, 1.0);
  return m;
}

// Scalar-loop reference for softmax(Q K^T / sqrt(d_k)) V.
Tensor2 attention_reference(const Tensor2& q, const Tensor2& k, const Tensor2& v, Eigen::Index dk) {
  Tensor2 out = Tensor2::Zero(q.rows(), v.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<double> s(static_cast<std::size_t>(k.rows()));
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      double dot = 0;
      for (Eigen::Index c = 0; c < dk; ++c) dot += q(i, c) * k(j, c);
      s[static_cast<std::size_t>(j)] = dot / std::sqrt(static_cast<double>(dk));
      mx = std::max(mx, s[static_cast<std::size_t>(j)]);
    }
    double z = 0;
    for (auto& x : s) z += (x = std::exp(x - mx));
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      for (Eigen::Index c = 0; c < v.cols(); ++c) out(i, c) += s[static_cast<std::size_t>(j)] / z * v(j, c);
    }
  }
  return out;
}

TEST(Attention, SingleKeyReturnsItsValue) {
  Tensor2 q(1, 2), k(1, 2), v(1, 2);
  q << 1, 0;
  k << 1, 0;
  v << 3, 7;
  const auto out = attention(q, k, v, 2);
  EXPECT_DOUBLE_EQ(out(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 7.0);
}

TEST(Attention, EqualLogitsAverageValues) {
  Tensor2 q = Tensor2::Zero(1, 2), k(2, 2), v(2, 2);
  k << 1, 0, 0, 1;
  v << 2, 0, 0, 2;
  const auto out = attention(q, k, v, 2);
  EXPECT_NEAR(out(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(out(0, 1), 1.0, 1e-15);
}

TEST(Attention, MatchesScalarReference) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = random_matrix(3, 4, rng), k = random_matrix(3, 4, rng), v = random_matrix(3, 5, rng);
    AttentionCache cache;
    const auto out = attention(q, k, v, 4, &cache);
    EXPECT_LT((out - attention_reference(q, k, v, 4)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index r = 0; r < cache.weights.rows(); ++r) EXPECT_NEAR(cache.weights.row(r).sum(), 1.0, 1e-9);
  }
}

TEST(Attention, ShapeMismatchThrows) {
  Tensor2 q = Tensor2::Zero(1, 3), k = Tensor2::Zero(2, 2), v = Tensor2::Zero(2, 2);
  EXPECT_THROW(attention(q, k, v, 2), DimensionError);
  Tensor2 q2 = Tensor2::Zero(1, 2), v2 = Tensor2::Zero(3, 2);
  EXPECT_THROW(attention(q2, k, v2, 2), DimensionError);
}

TEST(Attention, IsDeterministic) {
  Rng rng(4);
  const auto q = random_matrix(2, 3, rng), k = random_matrix(4, 3, rng), v = random_matrix(4, 2, rng);
  EXPECT_TRUE((attention(q, k, v, 3).array() == attention(q, k, v, 3).array()).all());
}

TEST(Attention, GradientsMatchFiniteDifferences) {
  Rng rng(5);
  Parameter q("q", random_matrix(2, 3, rng)), k("k", random_matrix(4, 3, rng)), v("v", random_matrix(4, 2, rng));
  const Tensor2 target = random_matrix(2, 2, rng);
  auto loss = [&](bool grad) {
    AttentionCache cache;
    const auto out = attention(q.value, k.value, v.value, 3, &cache);
    const Tensor2 diff = out - target;
    if (grad) {
      const auto g = attention_backward(cache, diff);
      q.grad += g.queries;
      k.grad += g.keys;
      v.grad += g.values;
    }
    return 0.5 * diff.squaredNorm();
  };
  EXPECT_LT(finite_diff_gradcheck(loss, {&q, &k, &v}).max_relative_error, 1e-6);
}

TEST(Dense, IdentityLayerPassesInputThrough) {
  Rng rng(1);
  DenseNet net("id", {3, 3}, {Activation::identity}, rng);
  net.layers()[0].weight.value = Tensor2::Identity(3, 3);
  net.layers()[0].bias.value.setZero();
  Tensor2 x(2, 3);
  x << 1, -2, 3, 0.5, 0, -1;
  EXPECT_TRUE((net.forward(x).array() == x.array()).all());
}

TEST(Dense, ReluClampsNegative) {
  Rng rng(1);
  DenseNet net("relu", {1, 1}, {Activation::relu}, rng);
  net.layers()[0].weight.value(0, 0) = -1;
  net.layers()[0].bias.value(0, 0) = 0;
  Tensor2 x(1, 1);
  x << 2;
  EXPECT_EQ(net.forward(x)(0, 0), 0.0);
}

TEST(Dense, TwoLayerMatchesScalarLoop) {
  Rng rng(9);
  DenseNet net("mlp", {4, 5, 3}, {Activation::tanh, Activation::relu}, rng);
  const auto x = random_matrix(3, 4, rng);
  const auto y = net.forward(x);
  const auto& l0 = net.layers()[0];
  const auto& l1 = net.layers()[1];
  for (Eigen::Index r = 0; r < 3; ++r) {
    std::vector<double> h(5);
    for (int j = 0; j < 5; ++j) {
      double s = l0.bias.value(0, j);
      for (int i = 0; i < 4; ++i) s += x(r, i) * l0.weight.value(i, j);
      h[static_cast<std::size_t>(j)] = std::tanh(s);
    }
    for (int j = 0; j < 3; ++j) {
      double s = l1.bias.value(0, j);
      for (int i = 0; i < 5; ++i) s += h[static_cast<std::size_t>(i)] * l1.weight.value(i, j);
      EXPECT_NEAR(y(r, j), std::max(0.0, s), 1e-10);
    }
  }
}

TEST(Dense, WrongInputWidthThrows) {
  Rng rng(1);
  DenseNet net("mlp", {4, 2}, {Activation::tanh}, rng);
  EXPECT_THROW(net.forward(Tensor2::Zero(1, 3)), DimensionError);
}

TEST(Dense, BackwardMatchesFiniteDifferences) {
  Rng rng(2);
  DenseNet net("mlp", {3, 6, 2}, {Activation::tanh, Activation::identity}, rng);
  const auto x = random_matrix(4, 3, rng);
  auto loss = [&](bool grad) {
    DenseNet::Cache cache;
    const auto y = net.forward(x, &cache);
    if (grad) net.backward(cache, y);
    return 0.5 * y.squaredNorm();
  };
  EXPECT_LT(finite_diff_gradcheck(loss, net.parameters()).max_relative_error, 1e-6);
}

TEST(Dense, GlorotRangeAndParameterCount) {
  Rng rng(1);
  DenseNet net("mlp", {10, 6}, {Activation::identity}, rng);
  const double bound = std::sqrt(6.0 / 16.0);
  EXPECT_LE(net.layers()[0].weight.value.cwiseAbs().maxCoeff(), bound);
  std::size_t count = 0;
  for (auto* p : net.parameters()) count += static_cast<std::size_t>(p->value.size());
  EXPECT_EQ(count, 10u * 6u + 6u);
}

TEST(Loss, BinaryCrossEntropyValues) {
  EXPECT_NEAR(binary_cross_entropy(0.5, 1), 0.6931471805599453, 1e-15);
  EXPECT_NEAR(binary_cross_entropy(0.9, 0), 2.302585092994046, 1e-12);
  EXPECT_LT(binary_cross_entropy(1.0 - 1e-12, 1), 1e-6);
  EXPECT_TRUE(std::isfinite(binary_cross_entropy(0.0, 1)));
  EXPECT_NEAR(binary_cross_entropy(0.0, 1), -std::log(kProbabilityEpsilon), 1e-12);
}

TEST(Loss, BinaryCrossEntropyGradient) {
  for (double p : {0.2, 0.5, 0.7}) {
    for (int y : {0, 1}) {
      const double h = 1e-6;
      const double numeric = (binary_cross_entropy(p + h, y) - binary_cross_entropy(p - h, y)) / (2 * h);
      EXPECT_NEAR(binary_cross_entropy_grad(p, y), numeric, 1e-6);
    }
  }
  EXPECT_EQ(binary_cross_entropy_grad(0.0, 1), 0.0);
}

TEST(Loss, SigmoidIsStable) {
  EXPECT_NEAR(sigmoid(0.0), 0.5, 1e-16);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 1e-15);
}

TEST(Loss, SoftmaxCrossEntropyAndGradient) {
  Vector logits(3);
  logits << 1.0, 2.0, 0.5;
  Vector d;
  const double ce = softmax_cross_entropy(logits, 1, &d);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(0.5);
  EXPECT_NEAR(ce, -std::log(std::exp(2.0) / z), 1e-14);
  EXPECT_NEAR(d(0), std::exp(1.0) / z, 1e-14);
  EXPECT_NEAR(d(1), std::exp(2.0) / z - 1.0, 1e-14);
  EXPECT_NEAR(log_softmax(logits).array().exp().sum(), 1.0, 1e-14);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Parameter p("p", Tensor2::Constant(2, 2, 1.5));
  Adam opt({&p}, AdamConfig{});
  opt.step();
  EXPECT_TRUE((p.value.array() == 1.5).all());
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter p("p", Tensor2::Constant(1, 1, 2.0));
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam opt({&p}, cfg);
  p.grad(0, 0) = 1.0;
  opt.step();
  // m_hat = 1, v_hat = 1, update = lr / (1 + eps).
  EXPECT_NEAR(p.value(0, 0), 2.0 - 0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(Adam, SymmetricParametersStayEqual) {
  Parameter a("a", Tensor2::Constant(1, 3, 0.3)), b("b", Tensor2::Constant(1, 3, 0.3));
  Adam opt({&a, &b}, AdamConfig{});
  for (int s = 0; s < 10; ++s) {
    a.grad.setConstant(0.1 * s - 0.2);
    b.grad = a.grad;
    opt.step();
  }
  EXPECT_TRUE((a.value.array() == b.value.array()).all());
}

TEST(Adam, NonFiniteGradientNamesParameterAndLeavesValues) {
  Parameter a("good", Tensor2::Constant(1, 1, 1.0)), b("bad", Tensor2::Constant(1, 1, 1.0));
  Adam opt({&a, &b}, AdamConfig{});
  a.grad(0, 0) = 1.0;
  b.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    opt.step();
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
  EXPECT_EQ(a.value(0, 0), 1.0);
}

TEST(GradCheck, QuadraticIsExact) {
  Parameter t("theta", Tensor2::Constant(1, 1, 3.0));
  auto loss = [&](bool grad) {
    if (grad) t.grad(0, 0) += t.value(0, 0);
    return 0.5 * t.value(0, 0) * t.value(0, 0);
  };
  const auto r = finite_diff_gradcheck(loss, {&t});
  EXPECT_LT(r.max_relative_error, 1e-9);
  EXPECT_EQ(r.coordinates, 1);
  EXPECT_EQ(t.value(0, 0), 3.0);
  EXPECT_EQ(t.grad(0, 0), 0.0);
}

TEST(GradCheck, DetectsWrongGradient) {
  Parameter t("theta", Tensor2::Constant(1, 1, 3.0));
  auto loss = [&](bool grad) {
    if (grad) t.grad(0, 0) += 2.0 * t.value(0, 0);
    return 0.5 * t.value(0, 0) * t.value(0, 0);
  };
  const auto r = finite_diff_gradcheck(loss, {&t});
  EXPECT_GT(r.max_relative_error, 0.1);
  EXPECT_EQ(r.worst_parameter, "theta");
}

TEST(Checkpoint, RoundTripIsLossless) {
  testing::TempDir dir;
  Rng rng(11);
  Parameter a("a", random_matrix(3, 4, rng)), b("b", random_matrix(1, 7, rng));
  a.value(0, 0) = 0.1 + 0.2;
  a.value(1, 1) = std::nextafter(1.0, 2.0);
  save_checkpoint(dir / "m.ckpt", {&a, &b}, {{"note", "x"}});
  Parameter a2("a", Tensor2::Zero(3, 4)), b2("b", Tensor2::Zero(1, 7));
  const auto meta = load_checkpoint(dir / "m.ckpt", {&a2, &b2});
  EXPECT_EQ(meta.at("note"), "x");
  EXPECT_TRUE((a.value.array() == a2.value.array()).all());
  EXPECT_TRUE((b.value.array() == b2.value.array()).all());
}

TEST(Checkpoint, RejectsShapeMismatchMissingNameAndNewerVersion) {
  testing::TempDir dir;
  Parameter a("a", Tensor2::Ones(2, 2));
  save_checkpoint(dir / "m.ckpt", {&a}, {});
  Parameter wrong_shape("a", Tensor2::Zero(3, 2));
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt", {&wrong_shape}), LoadError);
  Parameter missing("zzz", Tensor2::Zero(2, 2));
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt", {&missing}), LoadError);

  auto doc = checkpoint_to_json({&a}, {});
  doc["version"] = kCheckpointVersion + 1;
  Parameter target("a", Tensor2::Zero(2, 2));
  EXPECT_THROW(checkpoint_from_json(doc, {&target}), LoadError);
  EXPECT_TRUE((target.value.array() == 0).all());
}

TEST(Checkpoint, TruncatedFileReportsOffset) {
  testing::TempDir dir;
  Parameter a("a", Tensor2::Ones(2, 2));
  save_checkpoint(dir / "m.ckpt", {&a}, {});
  std::ifstream in(dir / "m.ckpt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ofstream(dir / "cut.ckpt") << text.substr(0, text.size() / 2);
  try {
    load_checkpoint(dir / "cut.ckpt", {&a});
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
  }
}

TEST(Trainer, ReducesQuadraticLoss) {
  Parameter w("w", Tensor2::Constant(1, 1, 5.0));
  TrainLoopConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.batch_size = 4;
  cfg.epochs = 50;
  auto loss = [&](std::span<const std::size_t> batch, bool grad) {
    if (grad) w.grad(0, 0) += w.value(0, 0);
    (void)batch;
    return 0.5 * w.value(0, 0) * w.value(0, 0);
  };
  const auto log = run_training({&w}, 16, cfg, loss);
  ASSERT_EQ(log.epoch_losses.size(), 50u);
  EXPECT_LT(log.epoch_losses.back(), log.epoch_losses.front());
}

TEST(Trainer, NanLossRestoresLastEpochAndThrows) {
  Parameter w("w", Tensor2::Constant(1, 1, 1.0));
  TrainLoopConfig cfg;
  cfg.batch_size = 1;
  cfg.epochs = 5;
  int calls = 0;
  Tensor2 after_first_epoch;
  auto loss = [&](std::span<const std::size_t>, bool grad) {
    ++calls;
    if (calls > 2) return std::numeric_limits<double>::quiet_NaN();
    if (grad) w.grad(0, 0) += 1.0;
    return 1.0;
  };
  auto hook = [&](std::size_t, double) { after_first_epoch = w.value; };
  EXPECT_THROW(run_training({&w}, 2, cfg, loss, hook), NumericError);
  ASSERT_EQ(after_first_epoch.size(), 1);
  EXPECT_EQ(w.value(0, 0), after_first_epoch(0, 0));
}

TEST(Trainer, SmoothedAverages) {
  const std::vector<double> losses = {3, 2, 1, 0};
  const auto s = smoothed(losses, 2);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[0], 2.5);
  EXPECT_DOUBLE_EQ(s[2], 0.5);
  EXPECT_TRUE(smoothed(losses, 5).empty());
}

}  // namespace
}  // namespace genret::nn
