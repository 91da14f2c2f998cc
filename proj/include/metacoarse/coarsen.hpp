#ifndef METACOARSE_COARSEN_HPP_
#define METACOARSE_COARSEN_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "metacoarse/graph.hpp"

namespace metacoarse {

enum class CoarseningMethod { kIdentity, kKron, kVariationEdges };

std::string_view to_string(CoarseningMethod method);
std::optional<CoarseningMethod> parse_coarsening_method(std::string_view text);

struct WeightedEdge {
  NodeId a = 0;
  NodeId b = 0;
  double weight = 0.0;
};

// Surjective map from original nodes onto supernodes. Supernodes are numbered
// by the order in which their smallest original node appears.
class CoarseningMap {
 public:
  CoarseningMap() = default;

  // `labels[i]` is any block label for original_nodes[i]; labels are renumbered.
  CoarseningMap(CoarseningMethod method, double ratio, std::vector<NodeId> original_nodes,
                const std::vector<std::size_t>& labels);

  static CoarseningMap identity(std::span<const NodeId> nodes, CoarseningMethod method = CoarseningMethod::kIdentity,
                                double ratio = 0.0);

  CoarseningMethod method() const { return method_; }
  double ratio() const { return ratio_; }
  const std::vector<NodeId>& original_nodes() const { return original_nodes_; }
  std::size_t num_supernodes() const { return blocks_.size(); }

  // Sorted original nodes of a supernode. Throws std::out_of_range.
  const std::vector<NodeId>& block(std::size_t supernode) const;
  const std::vector<std::vector<NodeId>>& blocks() const { return blocks_; }
  std::size_t supernode_of(NodeId original) const;

  // Set when the spectral basis could not be computed and heavy-edge ranking was used.
  bool spectral_fallback = false;
  // Kron only: off-diagonal couplings of the reduced Laplacian, a < b.
  std::vector<WeightedEdge> kron_edges;

  std::string to_json() const;
  static CoarseningMap from_json(const std::string& text);

 private:
  CoarseningMethod method_ = CoarseningMethod::kIdentity;
  double ratio_ = 0.0;
  std::vector<NodeId> original_nodes_;           // sorted
  std::vector<std::size_t> assignment_;          // per original index
  std::vector<std::vector<NodeId>> blocks_;
};

struct CoarseningResult {
  SampleGraph coarse;  // level C_CFG, node ids = supernode ids
  CoarseningMap map;
};

// ceil((1 - r) * n), the largest admissible coarse node count.
std::size_t coarse_size_bound(std::size_t n, double r);

// Symmetrized 0/1 adjacency (self-loops dropped) and its combinatorial Laplacian.
Eigen::MatrixXd symmetrized_adjacency(const SampleGraph& g);
Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency);

// Schur complement of L onto `kept` (Kron reduction); kept is in ascending order.
Eigen::MatrixXd kron_reduce(const Eigen::MatrixXd& L, std::span<const std::size_t> kept);

// Kept set of one Kron level: indices where the eigenvector of the largest
// Laplacian eigenvalue is non-negative (sign fixed so its largest-magnitude
// entry is positive). The set is grown to `min_kept` by descending eigenvector
// value if it falls short.
std::vector<std::size_t> kron_kept_set(const Eigen::MatrixXd& L, std::size_t min_kept = 1);

// Local variation cost of contracting edge (i, j) given the spectral basis A
// (one row per node) and the weighted adjacency W.
double variation_edge_cost(const Eigen::MatrixXd& W, const Eigen::MatrixXd& A, std::size_t i, std::size_t j);

// Spectral basis U_k diag(lambda^-1/2) of the first k Laplacian eigenvectors;
// null-space columns are zeroed. Returns nullopt if the eigensolver fails.
std::optional<Eigen::MatrixXd> spectral_basis(const Eigen::MatrixXd& L, std::size_t k);

CoarseningResult coarsen_identity(const SampleGraph& g);

// Multilevel local variation (edge families). k_subspace defaults to min(n - 1, 10).
CoarseningResult coarsen_variation_edges(const SampleGraph& g, double r,
                                         std::optional<std::size_t> k_subspace = std::nullopt);

// Repeated Kron halving until the size bound holds.
CoarseningResult coarsen_kron(const SampleGraph& g, double r);

CoarseningResult coarsen(const SampleGraph& g, CoarseningMethod method, double r);

// Supernode feature = sum of the features of its block in `embedded_cfg`.
SampleGraph embed_supernodes(const SampleGraph& coarse, const CoarseningMap& map, const SampleGraph& embedded_cfg);

// Union of the blocks of the given supernodes, sorted. Throws std::out_of_range.
std::vector<NodeId> backtrack_nodes(const CoarseningMap& map, std::span<const NodeId> supernodes);

}  // namespace metacoarse

#endif  // METACOARSE_COARSEN_HPP_
