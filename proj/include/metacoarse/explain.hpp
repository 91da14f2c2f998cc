#ifndef METACOARSE_EXPLAIN_HPP_
#define METACOARSE_EXPLAIN_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metacoarse/gcn.hpp"
#include "metacoarse/graph.hpp"

namespace metacoarse {

// Produces one signed attribution per edge of a featured graph.
class EdgeExplainer {
 public:
  virtual ~EdgeExplainer() = default;
  virtual std::string name() const = 0;
  virtual Eigen::VectorXd attribute(const GcnModel& model, const SampleGraph& g) const = 0;
};

// Integrated gradients of the predicted-class logit along the straight path
// from the all-zero edge mask to the all-ones mask, midpoint rule.
// Throws std::invalid_argument if steps < 1.
Eigen::VectorXd integrated_gradients(const GcnModel& model, const SampleGraph& g, std::size_t steps = 50);

class IntegratedGradients : public EdgeExplainer {
 public:
  explicit IntegratedGradients(std::size_t steps = 50);
  std::string name() const override { return "integrated_gradients"; }
  Eigen::VectorXd attribute(const GcnModel& model, const SampleGraph& g) const override;
  std::size_t steps() const { return steps_; }

 private:
  std::size_t steps_;
};

enum class SelectionMethod { kTes };

struct SelectionPolicy {
  SelectionMethod method = SelectionMethod::kTes;
  double epsilon = 0.10;
};

struct ExplanationMask {
  std::string sample_id;
  std::vector<Edge> edges;                 // aligned with the graph's edges
  Eigen::VectorXd attribution;             // one entry per edge
  std::vector<std::size_t> ranked;         // edge indices, best first
  std::vector<std::size_t> selected_edges;     // sorted edge indices
  std::vector<std::size_t> unimportant_edges;  // sorted complement
  std::vector<NodeId> selected_nodes;          // sorted

  std::string to_json() const;
  static ExplanationMask from_json(const std::string& text);
};

// Nodes the selection must touch: max(ceil(eps * n), ceil(log2 n), first_edge_nodes).
std::size_t tes_node_budget(std::size_t num_nodes, std::size_t first_edge_nodes, double epsilon);

// Ranks edges by attribution (descending, ties by smaller (src, dst)) and takes
// them in order until the node budget is met. A graph without edges selects
// all of its nodes. Throws std::invalid_argument on a size mismatch or a
// non-positive epsilon.
ExplanationMask select_tes(const SampleGraph& g, const Eigen::VectorXd& attribution, const SelectionPolicy& policy);

// Edgewise subgraphs with every node retained.
SampleGraph selected_subgraph(const SampleGraph& g, const ExplanationMask& mask);
SampleGraph unimportant_subgraph(const SampleGraph& g, const ExplanationMask& mask);

// Whether the predictions on the complement and on the selection match the
// prediction on the full graph.
struct FidelityOutcome {
  bool removed_matches = true;  // prediction on G minus S equals the full prediction
  bool kept_matches = true;     // prediction on S alone equals the full prediction
};

FidelityOutcome fidelity_outcome(const GcnModel& model, const SampleGraph& g, const ExplanationMask& mask);

struct CurvePoint {
  double epsilon = 0.0;
  double fid_plus = 0.0;
  double fid_minus = 0.0;
  double charact = 0.0;
  double mean_selected_fraction = 0.0;  // selected nodes / nodes, averaged
  std::size_t samples = 0;
};

// Characterization over an epsilon grid for precomputed attributions (one per
// sample). The grid is sorted and deduplicated. Throws on an empty sample set.
std::vector<CurvePoint> characterization_curve(const GcnModel& model, std::span<const SampleGraph> samples,
                                               std::span<const Eigen::VectorXd> attributions,
                                               std::vector<double> epsilon_grid);

}  // namespace metacoarse

#endif  // METACOARSE_EXPLAIN_HPP_
