#include <algorithm>
#include <filesystem>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "metacoarse/gcn.hpp"
#include "metacoarse/train.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace metacoarse {
namespace {

using testing::random_featured;
using testing::random_model;

Eigen::VectorXd ones(const SampleGraph& g) { return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.num_edges())); }

Eigen::VectorXd relu(const Eigen::VectorXd& v) { return v.cwiseMax(0.0); }

TEST(Forward, SingleZeroNodeIsBiasPath) {
  std::mt19937_64 rng(1);
  const GcnModel m = random_model(rng, 5, 8);
  InstructionRecord i;
  const SampleGraph g = SampleGraph("z", Level::kCfg, Label::kBenign, {0}, {{i}}, {})
                            .with_features(Eigen::MatrixXd::Zero(1, 5));
  Eigen::VectorXd h = relu(m.biases()[0]);
  h = relu(m.weights()[1].transpose() * h + m.biases()[1]);
  h = relu(m.weights()[2].transpose() * h + m.biases()[2]);
  const Eigen::Vector2d expected = m.weights()[3].transpose() * h + m.biases()[3];
  EXPECT_TRUE(graph_logits(m, g).isApprox(expected, 1e-12));
}

TEST(Forward, ZeroMaskEqualsEdgelessGraph) {
  std::mt19937_64 rng(2);
  const GcnModel m = random_model(rng, 6, 8);
  for (int t = 0; t < 10; ++t) {
    const SampleGraph g = random_featured(rng, 10, 6);
    const SampleGraph bare = keep_edges(g, {});
    const Eigen::Vector2d masked = graph_logits(m, g, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_edges())));
    EXPECT_LE((masked - graph_logits(m, bare)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, PermutationInvariance) {
  std::mt19937_64 rng(3);
  const GcnModel m = random_model(rng, 7, 16);
  for (int t = 0; t < 20; ++t) {
    const SampleGraph g = random_featured(rng, 12, 7);
    const SampleGraph p = testing::relabel(g, rng, "p");
    EXPECT_LE((graph_logits(m, g) - graph_logits(m, p)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, DuplicatedDisconnectedCopyKeepsLogits) {
  std::mt19937_64 rng(4);
  const GcnModel m = random_model(rng, 4, 8);
  const SampleGraph g = random_featured(rng, 8, 4);
  const auto n = static_cast<NodeId>(g.num_nodes());
  std::vector<NodeId> nodes;
  std::vector<NodePayload> payload;
  std::vector<Edge> edges;
  for (NodeId copy = 0; copy < 2; ++copy) {
    for (NodeId v = 0; v < n; ++v) {
      nodes.push_back(copy * n + v);
      payload.push_back(g.payload()[v]);
    }
    for (auto [s, d] : g.edge_indices()) edges.push_back({copy * n + s, copy * n + d});
  }
  Eigen::MatrixXd f(2 * n, g.features().cols());
  f << g.features(), g.features();
  const SampleGraph doubled = SampleGraph("d", Level::kCfg, g.label(), nodes, payload, edges).with_features(f);
  EXPECT_LE((graph_logits(m, doubled) - graph_logits(m, g)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, BatchMatchesPerGraphLogits) {
  std::mt19937_64 rng(5);
  const GcnModel m = random_model(rng, 5, 8);
  std::vector<SampleGraph> graphs;
  for (int t = 0; t < 5; ++t) graphs.push_back(random_featured(rng, 9, 5));
  std::vector<const SampleGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  const GraphBatch batch = make_batch(ptrs);
  EXPECT_EQ(batch.num_graphs(), 5u);
  const ForwardResult fwd = gcn_forward(m, batch, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(batch.num_edges())));
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    EXPECT_LE((fwd.logits.row(static_cast<Eigen::Index>(k)).transpose() - graph_logits(m, graphs[k])).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(Forward, WidthMismatchThrows) {
  std::mt19937_64 rng(6);
  const GcnModel m = random_model(rng, 5, 8);
  const SampleGraph g = random_featured(rng, 5, 4);
  EXPECT_THROW(predict(m, g), std::invalid_argument);
  std::vector<SampleGraph> mixed{random_featured(rng, 5, 5), g};
  std::vector<const SampleGraph*> ptrs{&mixed[0], &mixed[1]};
  EXPECT_THROW(make_batch(ptrs), std::invalid_argument);
}

TEST(Backward, WeightGradientsMatchCentralDifferences) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    GcnModel m = random_model(rng, 6, 8);
    std::vector<SampleGraph> graphs{random_featured(rng, 6, 6), random_featured(rng, 6, 6)};
    std::vector<const SampleGraph*> ptrs{&graphs[0], &graphs[1]};
    const GraphBatch batch = make_batch(ptrs);
    const Eigen::VectorXd mask = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(batch.num_edges()), 0.7);
    const ForwardResult fwd = gcn_forward(m, batch, mask);
    Eigen::MatrixXd dlogits;
    cross_entropy(fwd.logits, batch.labels, &dlogits);
    const Gradients grads = gcn_backward(m, batch, mask, fwd, dlogits, false);

    GcnModel probe = m;
    auto loss = [&](const Eigen::VectorXd& theta) {
      probe.unflatten(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
      return cross_entropy(gcn_forward(probe, batch, mask).logits, batch.labels, nullptr);
    };
    const std::vector<double> flat = m.flatten();
    const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
    const Eigen::VectorXd numeric = testing::central_differences(loss, theta);

    GcnModel packed = m;
    for (std::size_t k = 0; k < GcnModel::kNumTensors; ++k) {
      packed.weights()[k] = grads.weights[k];
      packed.biases()[k] = grads.biases[k];
    }
    const std::vector<double> g = packed.flatten();
    const Eigen::VectorXd analytic = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    EXPECT_LT(testing::max_relative_error(analytic, numeric), 1e-4);
  }
}

TEST(Backward, MaskGradientsMatchCentralDifferences) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const GcnModel m = random_model(rng, 6, 16);
    const SampleGraph g = random_featured(rng, 10, 6);
    if (g.num_edges() == 0) continue;
    const GraphBatch batch = make_batch(g);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    Eigen::VectorXd mask(static_cast<Eigen::Index>(g.num_edges()));
    for (Eigen::Index e = 0; e < mask.size(); ++e) mask[e] = u(rng);
    const int cls = t % 2;
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(1, 2);
    dlogits(0, cls) = 1.0;
    const ForwardResult fwd = gcn_forward(m, batch, mask);
    const Eigen::VectorXd analytic = gcn_backward(m, batch, mask, fwd, dlogits, true).edge_mask;
    auto logit = [&](const Eigen::VectorXd& x) { return gcn_forward(m, batch, x).logits(0, cls); };
    EXPECT_LT(testing::max_relative_error(analytic, testing::central_differences(logit, mask)), 1e-4);
  }
}

TEST(Backward, ConstantSelectorGivesZeroGradients) {
  std::mt19937_64 rng(9);
  const GcnModel m = random_model(rng, 4, 8);
  const SampleGraph g = random_featured(rng, 6, 4);
  const GraphBatch batch = make_batch(g);
  const ForwardResult fwd = gcn_forward(m, batch, ones(g));
  const Gradients grads = gcn_backward(m, batch, ones(g), fwd, Eigen::MatrixXd::Zero(1, 2), true);
  for (std::size_t k = 0; k < GcnModel::kNumTensors; ++k) {
    EXPECT_EQ(grads.weights[k].cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(grads.biases[k].cwiseAbs().maxCoeff(), 0.0);
  }
  if (g.num_edges()) EXPECT_EQ(grads.edge_mask.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CrossEntropy, ValueAndGradient) {
  Eigen::MatrixXd logits(2, 2);
  logits << 0.0, 0.0, 2.0, -1.0;
  const std::vector<int> labels{1, 0};
  Eigen::MatrixXd d;
  const double loss = cross_entropy(logits, labels, &d);
  const double second = -std::log(std::exp(2.0) / (std::exp(2.0) + std::exp(-1.0)));
  EXPECT_NEAR(loss, (std::log(2.0) + second) / 2.0, 1e-12);
  EXPECT_NEAR(d(0, 1), -0.25, 1e-12);
  EXPECT_NEAR(d.sum(), 0.0, 1e-12);
}

TEST(Predict, ArgmaxAndTieRule) {
  EXPECT_EQ(argmax_label(Eigen::Vector2d(2.0, -1.0)), Label::kBenign);
  EXPECT_EQ(argmax_label(Eigen::Vector2d(-1.0, 2.0)), Label::kMalicious);
  EXPECT_EQ(argmax_label(Eigen::Vector2d(0.5, 0.5)), Label::kBenign);
}

TEST(Predict, Deterministic) {
  std::mt19937_64 rng(10);
  const GcnModel m = random_model(rng, 4, 8);
  const SampleGraph g = random_featured(rng, 6, 4);
  const Prediction a = predict(m, g), b = predict(m, g);
  EXPECT_EQ(a.label, b.label);
  EXPECT_EQ(a.logits, b.logits);
}

TEST(Model, FlattenRoundTripAndShapes) {
  std::mt19937_64 rng(11);
  const GcnModel m = random_model(rng, 10, 128);
  EXPECT_EQ(m.weights()[0].rows(), 10);
  EXPECT_EQ(m.weights()[1].rows(), 128);
  EXPECT_EQ(m.weights()[3].cols(), 2);
  EXPECT_EQ(m.num_parameters(), 10u * 128 + 128 * 128 * 2 + 128 * 2 + 128 * 3 + 2);
  GcnModel copy(10, 128);
  copy.unflatten(m.flatten());
  EXPECT_EQ(copy.parameter_hash(), m.parameter_hash());
  EXPECT_THROW(copy.unflatten(std::vector<double>(3)), std::invalid_argument);
}

class Training : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { corpus_ = new testing::FeaturedCorpus(testing::planted_corpus(120, 21, 100)); }
  static void TearDownTestSuite() {
    delete corpus_;
    corpus_ = nullptr;
  }
  static std::span<const SampleGraph> train_set() { return {corpus_->featured.data(), 100}; }
  static std::span<const SampleGraph> val_set() { return {corpus_->featured.data() + 100, 20}; }
  static testing::FeaturedCorpus* corpus_;
};

testing::FeaturedCorpus* Training::corpus_ = nullptr;

TEST_F(Training, SeparableSetReachesHighTrainAccuracy) {
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.seed = 3;
  const Checkpoint ck = train(train_set(), val_set(), cfg);
  std::size_t correct = 0;
  for (const SampleGraph& g : train_set()) correct += predict(ck.model, g).label == g.label();
  EXPECT_GE(static_cast<double>(correct) / 100.0, 0.95);
  ASSERT_EQ(ck.history.size(), 40u);
  EXPECT_LT(ck.history[9].train_loss, ck.history[0].train_loss);
  // Checkpoint rule: earliest epoch with the minimum validation loss.
  const auto best = std::min_element(ck.history.begin(), ck.history.end(),
                                     [](const EpochRecord& a, const EpochRecord& b) { return a.val_loss < b.val_loss; });
  EXPECT_EQ(ck.epoch, best->epoch);
  EXPECT_EQ(ck.val_loss, best->val_loss);
  EXPECT_NEAR(evaluate_loss(ck.model, val_set()), ck.val_loss, 1e-12);
}

TEST_F(Training, SameSeedSameCheckpoint) {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden_dim = 16;
  cfg.seed = 5;
  const Checkpoint a = train(train_set(), val_set(), cfg);
  const Checkpoint b = train(train_set(), val_set(), cfg);
  EXPECT_EQ(a.model.parameter_hash(), b.model.parameter_hash());
  EXPECT_EQ(a.to_json(), b.to_json());
  cfg.seed = 6;
  EXPECT_NE(train(train_set(), val_set(), cfg).model.parameter_hash(), a.model.parameter_hash());
}

TEST_F(Training, ZeroLearningRateLeavesParameters) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.hidden_dim = 8;
  cfg.seed = 7;
  const std::span<const SampleGraph> small(corpus_->featured.data(), 16);
  const Checkpoint ck = train(small, val_set().subspan(0, 4), cfg);
  GcnModel init(small.front().feature_width(), 8, 0.5);
  init.initialize(7);
  EXPECT_EQ(ck.history.size(), 150u);
  EXPECT_EQ(ck.model.parameter_hash(), init.parameter_hash());
}

TEST_F(Training, EmptySetsThrow) {
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train({}, val_set(), cfg), std::invalid_argument);
  EXPECT_THROW(train(train_set(), {}, cfg), std::invalid_argument);
  cfg.batch_size = 0;
  EXPECT_THROW(train(train_set(), val_set(), cfg), std::invalid_argument);
}

TEST_F(Training, CheckpointFileRoundTripValidatesHashes) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.hidden_dim = 8;
  cfg.seed = 9;
  const Checkpoint ck = train(train_set(), val_set(), cfg);
  const auto path = std::filesystem::temp_directory_path() / "metacoarse_ckpt_test.json";
  ck.save(path);
  const Checkpoint back = Checkpoint::load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.model.parameter_hash(), ck.model.parameter_hash());
  EXPECT_EQ(back.epoch, ck.epoch);
  EXPECT_EQ(back.config.hash(), cfg.hash());

  std::string text = ck.to_json();
  const auto pos = text.find("\"epochs\"");
  ASSERT_NE(pos, std::string::npos);
  const auto digit = text.find_first_of("0123456789", pos);
  text[digit] = text[digit] == '2' ? '3' : '2';
  EXPECT_THROW(Checkpoint::from_json(text), std::runtime_error);
}

}  // namespace
}  // namespace metacoarse
