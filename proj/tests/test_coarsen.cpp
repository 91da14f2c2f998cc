#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "metacoarse/coarsen.hpp"
#include "metacoarse/encode.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace metacoarse {

void PrintTo(CoarseningMethod m, std::ostream* os) { *os << to_string(m); }

namespace {

SampleGraph from_edges(std::size_t n, const std::vector<Edge>& edges, std::string id = "g") {
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  std::vector<NodePayload> payload(n, NodePayload(1));
  for (std::size_t i = 0; i < n; ++i) payload[i][0].codes[kOpcode0Feature] = static_cast<std::uint32_t>(i + 1);
  return SampleGraph(std::move(id), Level::kCfg, Label::kBenign, std::move(nodes), std::move(payload), edges);
}

SampleGraph path(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return from_edges(n, e);
}


void expect_partition(const CoarseningMap& map, const SampleGraph& g) {
  std::vector<NodeId> all;
  for (std::size_t s = 0; s < map.num_supernodes(); ++s) {
    ASSERT_FALSE(map.block(s).empty());
    for (NodeId v : map.block(s)) {
      all.push_back(v);
      EXPECT_EQ(map.supernode_of(v), s);
    }
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, g.nodes());
}

TEST(SizeBound, CeilWithSlack) {
  EXPECT_EQ(coarse_size_bound(10, 0.5), 5u);
  EXPECT_EQ(coarse_size_bound(7, 0.5), 4u);
  EXPECT_EQ(coarse_size_bound(100, 0.75), 25u);
  EXPECT_EQ(coarse_size_bound(100, 0.999), 1u);
  EXPECT_EQ(coarse_size_bound(3, 0.0), 3u);
  EXPECT_EQ(coarse_size_bound(0, 0.5), 0u);
}

TEST(Identity, ZeroRatioKeepsGraph) {
  const SampleGraph g = from_edges(3, {{0, 1}, {1, 2}, {2, 2}});
  for (CoarseningMethod m : {CoarseningMethod::kIdentity, CoarseningMethod::kKron, CoarseningMethod::kVariationEdges}) {
    const CoarseningResult r = coarsen(g, m, 0.0);
    EXPECT_EQ(r.map.num_supernodes(), 3u);
    EXPECT_EQ(r.coarse.level(), Level::kCoarseCfg);
    EXPECT_EQ(r.coarse.payload(), g.payload());
    for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(r.map.block(s), (std::vector<NodeId>{static_cast<NodeId>(s)}));
  }
  EXPECT_EQ(coarsen_identity(g).coarse.num_edges(), 3u);
}

TEST(Methods, ParseAndPrint) {
  for (CoarseningMethod m : {CoarseningMethod::kIdentity, CoarseningMethod::kKron, CoarseningMethod::kVariationEdges}) {
    EXPECT_EQ(parse_coarsening_method(to_string(m)), m);
  }
  EXPECT_FALSE(parse_coarsening_method("heavy_edge"));
}

TEST(VariationEdges, EdgeCostClosedForm) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = testing::pick(rng, 3, 12);
    const Eigen::MatrixXd W = testing::random_connected_adjacency(rng, n, 0.3);
    const Eigen::MatrixXd A = *spectral_basis(laplacian(W), std::min<std::size_t>(n - 1, 10));
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < W.cols(); ++j) {
        if (W(i, j) == 0.0) continue;
        const double expected = (W.row(i).sum() + W.row(j).sum()) * (A.row(i) - A.row(j)).squaredNorm() / 2.0;
        EXPECT_NEAR(variation_edge_cost(W, A, static_cast<std::size_t>(i), static_cast<std::size_t>(j)), expected,
                    1e-10 * std::max(1.0, expected));
      }
    }
  }
}

TEST(VariationEdges, SpectralBasisIsWhitened) {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd W = testing::random_connected_adjacency(rng, 9, 0.3);
  const Eigen::MatrixXd L = laplacian(W);
  const Eigen::MatrixXd A = *spectral_basis(L, 5);
  const Eigen::MatrixXd G = A.transpose() * L * A;
  EXPECT_NEAR(G(0, 0), 0.0, 1e-10);  // null-space column is zeroed
  EXPECT_TRUE(G.bottomRightCorner(4, 4).isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-9));
}

TEST(VariationEdges, P4HalvesIntoContiguousPairs) {
  const SampleGraph g = path(4);
  const CoarseningResult r = coarsen_variation_edges(g, 0.5);
  ASSERT_EQ(r.map.num_supernodes(), 2u);
  EXPECT_EQ(r.map.block(0), (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(r.map.block(1), (std::vector<NodeId>{2, 3}));

  // Oracle: among the three pairings, the contiguous one has least variation
  // on the two lowest eigenvectors.
  const Eigen::MatrixXd L = laplacian(symmetrized_adjacency(g));
  const double contiguous = testing::partition_variation_cost(L, 2, {0, 0, 1, 1});
  EXPECT_LT(contiguous, testing::partition_variation_cost(L, 2, {0, 1, 0, 1}));
  EXPECT_LT(contiguous, testing::partition_variation_cost(L, 2, {0, 1, 1, 0}));

  const std::vector<NodeId> one{1};
  EXPECT_EQ(backtrack_nodes(r.map, one), (std::vector<NodeId>{2, 3}));
  EXPECT_EQ(r.coarse.edges(), (std::vector<Edge>{{0, 1}}));
}

TEST(VariationEdges, StarKeepsBoundAndSurjectivity) {
  const SampleGraph star = from_edges(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
  const CoarseningResult r = coarsen_variation_edges(star, 0.5);
  EXPECT_LE(r.map.num_supernodes(), 3u);
  EXPECT_GE(r.map.num_supernodes(), 1u);
  expect_partition(r.map, star);
  EXPECT_NO_THROW(r.map.supernode_of(0));
}

TEST(Kron, P8HalvingMatchesSchurOracle) {
  const SampleGraph g = path(8);
  const CoarseningResult r = coarsen_kron(g, 0.5);
  EXPECT_EQ(r.map.num_supernodes(), 4u);
  const Eigen::MatrixXd L = laplacian(symmetrized_adjacency(g));
  const auto kept = kron_kept_set(L, 4);
  ASSERT_EQ(kept.size(), 4u);
  EXPECT_LE((kron_reduce(L, kept) - testing::sequential_schur(L, kept)).cwiseAbs().maxCoeff(), 1e-9);
  // Alternating sign pattern keeps every other node of a path.
  EXPECT_TRUE(kept == (std::vector<std::size_t>{0, 2, 4, 6}) || kept == (std::vector<std::size_t>{1, 3, 5, 7}));
  expect_partition(r.map, g);
}

TEST(Kron, K4PreservesEffectiveResistance) {
  const SampleGraph g = from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  EXPECT_EQ(coarsen_kron(g, 0.25).map.num_supernodes(), 3u);
  const Eigen::MatrixXd L = laplacian(symmetrized_adjacency(g));
  const auto kept = kron_kept_set(L, 3);
  ASSERT_GE(kept.size(), 3u);
  const Eigen::MatrixXd full = testing::pseudo_inverse(L);
  const Eigen::MatrixXd reduced = testing::pseudo_inverse(kron_reduce(L, kept));
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = a + 1; b < kept.size(); ++b) {
      EXPECT_NEAR(testing::effective_resistance(reduced, a, b),
                  testing::effective_resistance(full, kept[a], kept[b]), 1e-9);
    }
  }
}

TEST(Kron, RandomSmallGraphsMatchOracles) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = testing::pick(rng, 2, 12);
    const Eigen::MatrixXd W = testing::random_connected_adjacency(rng, n, 0.25);
    const Eigen::MatrixXd L = laplacian(W);
    const auto kept = kron_kept_set(L, 1);
    ASSERT_FALSE(kept.empty());
    ASSERT_TRUE(std::is_sorted(kept.begin(), kept.end()));
    const Eigen::MatrixXd reduced = kron_reduce(L, kept);
    EXPECT_LE((reduced - testing::sequential_schur(L, kept)).cwiseAbs().maxCoeff(), 1e-9) << "n=" << n;
    EXPECT_LE(reduced.rowwise().sum().cwiseAbs().maxCoeff(), 1e-9);
    const Eigen::MatrixXd pf = testing::pseudo_inverse(L), pr = testing::pseudo_inverse(reduced);
    for (std::size_t a = 0; a < kept.size(); ++a) {
      for (std::size_t b = a + 1; b < kept.size(); ++b) {
        EXPECT_NEAR(testing::effective_resistance(pr, a, b), testing::effective_resistance(pf, kept[a], kept[b]), 1e-9);
      }
    }
  }
}

TEST(Kron, TwoLevelsEqualOneSchurComplement) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = testing::pick(rng, 6, 12);
    const Eigen::MatrixXd L = laplacian(testing::random_connected_adjacency(rng, n, 0.3));
    const auto first = kron_kept_set(L, 1);
    const Eigen::MatrixXd L1 = kron_reduce(L, first);
    const auto second = kron_kept_set(L1, 1);
    std::vector<std::size_t> composite;
    for (std::size_t k : second) composite.push_back(first[k]);
    EXPECT_LE((kron_reduce(L1, second) - testing::sequential_schur(L, composite)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Kron, CouplingsAreReducedLaplacianOffDiagonals) {
  const SampleGraph g = path(8);
  const CoarseningResult r = coarsen_kron(g, 0.5);
  // A path reduces to a path with unit-1/2 couplings between consecutive kept nodes.
  ASSERT_EQ(r.map.kron_edges.size(), 3u);
  for (const WeightedEdge& e : r.map.kron_edges) {
    EXPECT_LT(e.a, e.b);
    EXPECT_NEAR(e.weight, 0.5, 1e-12);
  }
  EXPECT_EQ(r.coarse.num_edges(), 3u);
}

class SurjectivityProperty : public ::testing::TestWithParam<CoarseningMethod> {};

TEST_P(SurjectivityProperty, RandomGraphsAllRatios) {
  std::mt19937_64 rng(GetParam() == CoarseningMethod::kKron ? 37 : 38);
  testing::CfgShape shape;
  shape.min_nodes = 1;
  shape.max_nodes = 40;
  shape.edge_probability = 0.05;
  for (int t = 0; t < 40; ++t) {
    shape.connected = t % 4 != 0;
    const SampleGraph g = testing::random_cfg(rng, shape, "g", Label::kBenign, t % 3 == 0);
    const auto components = weak_components(g);
    for (double r : {0.25, 0.5, 0.75, 0.999}) {
      const CoarseningResult res = coarsen(g, GetParam(), r);
      expect_partition(res.map, g);
      EXPECT_LE(res.map.num_supernodes(), std::max(coarse_size_bound(g.num_nodes(), r), components.size()));
      EXPECT_GE(res.map.num_supernodes(), components.size());
      EXPECT_EQ(res.coarse.num_nodes(), res.map.num_supernodes());
      // Blocks never straddle components.
      for (const auto& comp : components) {
        std::set<std::size_t> supers;
        for (std::size_t i : comp) supers.insert(res.map.supernode_of(g.nodes()[i]));
        for (std::size_t s : supers) {
          for (NodeId v : res.map.block(s)) {
            const std::size_t idx = *g.index_of(v);
            EXPECT_NE(std::find(comp.begin(), comp.end(), idx), comp.end());
          }
        }
      }
      // Payload is the concatenation of the block payloads.
      EXPECT_EQ(res.coarse.instruction_count(), g.instruction_count());
    }
  }
}

INSTANTIATE_TEST_SUITE_P(BothCoarseners, SurjectivityProperty,
                         ::testing::Values(CoarseningMethod::kKron, CoarseningMethod::kVariationEdges),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(VariationEdges, CoarseEdgesComeFromOriginalDirections) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 30; ++t) {
    const SampleGraph g = testing::random_cfg(rng, {2, 25, 3, 0.1, true, true});
    const CoarseningResult r = coarsen_variation_edges(g, 0.5);
    std::set<Edge> expected;
    for (const Edge& e : g.edges()) {
      const auto s = static_cast<NodeId>(r.map.supernode_of(e.src));
      const auto d = static_cast<NodeId>(r.map.supernode_of(e.dst));
      if (s != d) expected.insert({s, d});
    }
    EXPECT_EQ(std::vector<Edge>(expected.begin(), expected.end()), r.coarse.edges());
  }
}

TEST(VariationEdges, MaximalRatioLeavesOneNodePerComponent) {
  const SampleGraph g = from_edges(7, {{0, 1}, {1, 2}, {3, 4}, {5, 6}, {6, 5}});
  const CoarseningResult r = coarsen_variation_edges(g, 0.999);
  EXPECT_EQ(r.map.num_supernodes(), 3u);
  const CoarseningResult k = coarsen_kron(g, 0.999);
  EXPECT_EQ(k.map.num_supernodes(), 3u);
}

TEST(Kron, Deterministic) {
  std::mt19937_64 rng(47);
  const SampleGraph g = testing::random_cfg(rng, {20, 30, 3, 0.1, true, false});
  const CoarseningResult a = coarsen_kron(g, 0.5), b = coarsen_kron(g, 0.5);
  EXPECT_EQ(a.map.to_json(), b.map.to_json());
  EXPECT_EQ(a.coarse, b.coarse);
}

TEST(CoarseningMap, JsonRoundTrip) {
  std::mt19937_64 rng(53);
  const SampleGraph g = testing::random_cfg(rng, {10, 20, 3, 0.15, true, false});
  for (CoarseningMethod m : {CoarseningMethod::kKron, CoarseningMethod::kVariationEdges}) {
    const CoarseningResult r = coarsen(g, m, 0.5);
    const CoarseningMap back = CoarseningMap::from_json(r.map.to_json());
    EXPECT_EQ(back.to_json(), r.map.to_json());
    EXPECT_EQ(back.blocks(), r.map.blocks());
    EXPECT_EQ(back.method(), m);
  }
}

TEST(EmbedSupernodes, SumsAndConservesMass) {
  std::mt19937_64 rng(59);
  for (int t = 0; t < 20; ++t) {
    const SampleGraph g = testing::random_cfg(rng, {3, 20, 4, 0.15, true, false});
    const std::vector<SampleGraph> train{g};
    const Vocabulary v = Vocabulary::build(train);
    const SampleGraph e = embed_cfg_nodes(g, v);
    const CoarseningResult r = coarsen(g, t % 2 ? CoarseningMethod::kKron : CoarseningMethod::kVariationEdges, 0.5);
    const SampleGraph c = embed_supernodes(r.coarse, r.map, e);
    EXPECT_EQ(c.features().colwise().sum(), e.features().colwise().sum());
    for (std::size_t s = 0; s < r.map.num_supernodes(); ++s) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(e.features().cols());
      for (NodeId n : r.map.block(s)) sum += e.features().row(static_cast<Eigen::Index>(*e.index_of(n)));
      EXPECT_EQ(c.features().row(static_cast<Eigen::Index>(s)), sum);
    }
    const CoarseningResult id = coarsen_identity(g);
    EXPECT_EQ(embed_supernodes(id.coarse, id.map, e).features(), e.features());
  }
}

TEST(EmbedSupernodes, UnknownBlockNodeThrows) {
  const SampleGraph g = path(4);
  const CoarseningResult r = coarsen_variation_edges(g, 0.5);
  const SampleGraph other = from_edges(3, {{0, 1}});
  Eigen::MatrixXd f = Eigen::MatrixXd::Ones(3, 2);
  EXPECT_THROW(embed_supernodes(r.coarse, r.map, other.with_features(f)), std::invalid_argument);
}

TEST(Backtrack, NodesUnionOfBlocks) {
  const SampleGraph g = path(6);
  const CoarseningResult r = coarsen_variation_edges(g, 0.5);
  std::vector<NodeId> all(r.map.num_supernodes());
  std::iota(all.begin(), all.end(), NodeId{0});
  EXPECT_EQ(backtrack_nodes(r.map, all), g.nodes());
  EXPECT_TRUE(backtrack_nodes(r.map, std::vector<NodeId>{}).empty());
  const std::vector<NodeId> bad{99};
  EXPECT_THROW(backtrack_nodes(r.map, bad), std::out_of_range);
}

}  // namespace
}  // namespace metacoarse
