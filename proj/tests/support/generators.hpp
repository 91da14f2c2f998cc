#ifndef METACOARSE_TESTS_GENERATORS_HPP_
#define METACOARSE_TESTS_GENERATORS_HPP_

// Hand-rolled random inputs for property tests. Everything is driven by an
// explicit mt19937_64 so a failing case can be replayed from its seed.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metacoarse/graph.hpp"

namespace metacoarse::testing {

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// Codes stay inside every feature's width; opcode_0 gets a wider pool so
// vocabularies are not trivial.
inline InstructionRecord random_instruction(std::mt19937_64& rng, std::uint32_t opcode_pool = 12) {
  InstructionRecord instr;
  const auto& features = instruction_features();
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
    const std::uint32_t hi = std::min<std::uint32_t>(features[f].width, 3) - 1;
    instr.codes[f] = static_cast<std::uint32_t>(pick(rng, 0, hi));
  }
  instr.codes[kOpcode0Feature] = static_cast<std::uint32_t>(pick(rng, 1, opcode_pool));
  return instr;
}

struct CfgShape {
  std::size_t min_nodes = 2;
  std::size_t max_nodes = 12;
  std::size_t max_instructions = 4;
  double edge_probability = 0.25;
  bool connected = true;     // add a random spanning tree first
  bool self_loops = false;
};

// Random CFG with node ids 0..n-1 (shuffled into a sparse id space when
// `sparse_ids` is set, to catch index/id confusion).
inline SampleGraph random_cfg(std::mt19937_64& rng, const CfgShape& shape, std::string id = "g",
                              Label label = Label::kBenign, bool sparse_ids = false) {
  const std::size_t n = pick(rng, shape.min_nodes, shape.max_nodes);
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  if (sparse_ids) {
    for (NodeId& v : ids) v = v * 3 + 5;
  }
  std::set<Edge> edges;
  if (shape.connected) {
    for (std::size_t i = 1; i < n; ++i) {
      const std::size_t j = pick(rng, 0, i - 1);
      if (coin(rng, 0.5)) {
        edges.insert({ids[j], ids[i]});
      } else {
        edges.insert({ids[i], ids[j]});
      }
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v && !shape.self_loops) continue;
      if (coin(rng, shape.edge_probability)) edges.insert({ids[u], ids[v]});
    }
  }
  std::vector<NodePayload> payload(n);
  for (auto& p : payload) {
    const std::size_t k = pick(rng, 1, shape.max_instructions);
    for (std::size_t j = 0; j < k; ++j) p.push_back(random_instruction(rng));
  }
  return SampleGraph(std::move(id), Level::kCfg, label, std::move(ids), std::move(payload),
                     std::vector<Edge>(edges.begin(), edges.end()));
}

// Same graph with node ids relabeled by a random permutation.
inline SampleGraph relabel(const SampleGraph& g, std::mt19937_64& rng, std::string id) {
  std::vector<NodeId> perm(g.num_nodes());
  std::iota(perm.begin(), perm.end(), NodeId{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<NodePayload> payload(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) payload[perm[i]] = g.payload()[i];
  std::vector<Edge> edges;
  for (auto [s, d] : g.edge_indices()) edges.push_back({perm[s], perm[d]});
  std::vector<NodeId> nodes(g.num_nodes());
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  SampleGraph out(std::move(id), g.level(), g.label(), std::move(nodes), std::move(payload), std::move(edges));
  if (g.has_features()) {
    Eigen::MatrixXd f(g.features().rows(), g.features().cols());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) f.row(perm[i]) = g.features().row(static_cast<Eigen::Index>(i));
    out = out.with_features(std::move(f));
  }
  return out;
}

// Random symmetric 0/1 adjacency of a connected undirected graph.
inline Eigen::MatrixXd random_connected_adjacency(std::mt19937_64& rng, std::size_t n, double p) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i < n; ++i) {
    const auto j = static_cast<Eigen::Index>(pick(rng, 0, i - 1));
    W(static_cast<Eigen::Index>(i), j) = W(j, static_cast<Eigen::Index>(i)) = 1.0;
  }
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < W.cols(); ++j) {
      if (coin(rng, p)) W(i, j) = W(j, i) = 1.0;
    }
  }
  return W;
}

// Dense feature matrix with small non-negative integer entries.
inline Eigen::MatrixXd random_features(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) f(i, j) = static_cast<double>(pick(rng, 0, 2));
  }
  return f;
}

}  // namespace metacoarse::testing

#endif  // METACOARSE_TESTS_GENERATORS_HPP_
