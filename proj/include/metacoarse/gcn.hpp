#ifndef METACOARSE_GCN_HPP_
#define METACOARSE_GCN_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "metacoarse/graph.hpp"

namespace metacoarse {

inline constexpr std::size_t kNumGcnLayers = 3;
inline constexpr std::size_t kNumClasses = 2;

// Three GCN layers (input -> hidden -> hidden -> hidden), mean readout and a
// linear head. Every layer computes ReLU(A_hat H W + b).
class GcnModel {
 public:
  GcnModel() = default;
  GcnModel(std::size_t input_dim, std::size_t hidden_dim = 128, double dropout = 0.5);

  // Glorot-uniform weights, zero biases.
  void initialize(std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  double dropout() const { return dropout_; }

  // Index 0..2 are the GCN layers, index 3 is the head.
  static constexpr std::size_t kNumTensors = kNumGcnLayers + 1;
  std::array<Eigen::MatrixXd, kNumTensors>& weights() { return weights_; }
  const std::array<Eigen::MatrixXd, kNumTensors>& weights() const { return weights_; }
  std::array<Eigen::VectorXd, kNumTensors>& biases() { return biases_; }
  const std::array<Eigen::VectorXd, kNumTensors>& biases() const { return biases_; }

  std::size_t num_parameters() const;
  // Row-major weights then biases, tensor by tensor.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);
  bool all_finite() const;
  std::string parameter_hash() const;

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  double dropout_ = 0.5;
  std::array<Eigen::MatrixXd, kNumTensors> weights_;
  std::array<Eigen::VectorXd, kNumTensors> biases_;
};

// Block-diagonal composition of featured graphs. Node rows are stacked in
// input order and edges keep their per-graph order.
struct GraphBatch {
  Eigen::SparseMatrix<double, Eigen::RowMajor> features;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // global node indices
  std::vector<std::size_t> node_offsets;                       // size = graphs + 1
  std::vector<std::size_t> edge_offsets;                       // size = graphs + 1
  std::vector<int> labels;

  std::size_t num_graphs() const { return labels.size(); }
  std::size_t num_nodes() const { return node_offsets.back(); }
  std::size_t num_edges() const { return edges.size(); }
};

GraphBatch make_batch(std::span<const SampleGraph* const> graphs);
GraphBatch make_batch(const SampleGraph& g);

struct ForwardCache {
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_hat;
  Eigen::VectorXd degree;
  std::array<Eigen::MatrixXd, kNumGcnLayers> inputs;     // H_{l-1}, dense for l >= 1
  std::array<Eigen::MatrixXd, kNumGcnLayers> projected;  // P_l = H_{l-1} W_l
  std::array<Eigen::MatrixXd, kNumGcnLayers> pre;        // Z_l = A_hat P_l + b_l
  std::array<Eigen::MatrixXd, kNumGcnLayers> dropout_masks;  // scaled keep masks, empty if unused
  Eigen::MatrixXd readout;                                   // graphs x hidden
};

struct ForwardResult {
  Eigen::MatrixXd logits;  // graphs x 2
  ForwardCache cache;
};

// `edge_mask` has one entry per batch edge. Dropout follows layers 1 and 2
// only when `rng` is non-null.
ForwardResult gcn_forward(const GcnModel& model, const GraphBatch& batch, const Eigen::VectorXd& edge_mask,
                          std::mt19937_64* rng = nullptr);

struct Gradients {
  std::array<Eigen::MatrixXd, GcnModel::kNumTensors> weights;
  std::array<Eigen::VectorXd, GcnModel::kNumTensors> biases;
  Eigen::VectorXd edge_mask;  // empty unless requested
};

// Reverse pass for an upstream gradient on the logits (graphs x 2).
Gradients gcn_backward(const GcnModel& model, const GraphBatch& batch, const Eigen::VectorXd& edge_mask,
                       const ForwardResult& forward, const Eigen::MatrixXd& dlogits, bool mask_gradient);

// Mean softmax cross-entropy over the batch and its gradient on the logits.
double cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> labels, Eigen::MatrixXd* dlogits);

// Logits of one graph with dropout off.
Eigen::Vector2d graph_logits(const GcnModel& model, const SampleGraph& g);
Eigen::Vector2d graph_logits(const GcnModel& model, const SampleGraph& g, const Eigen::VectorXd& edge_mask);

// argmax with ties resolved to class 0.
Label argmax_label(const Eigen::Vector2d& logits);

}  // namespace metacoarse

#endif  // METACOARSE_GCN_HPP_
