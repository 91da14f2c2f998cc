#ifndef METACOARSE_GRAPH_HPP_
#define METACOARSE_GRAPH_HPP_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace metacoarse {

inline constexpr std::size_t kNumInstructionFeatures = 25;

// Position of opcode_0 inside an InstructionRecord.
inline constexpr std::size_t kOpcode0Feature = 4;

enum class Level { kCfg, kCoarseCfg, kAfg, kBacktrackedAfg };

enum class Label : int { kBenign = 0, kMalicious = 1 };

std::string_view to_string(Level level);
std::optional<Level> parse_level(std::string_view text);

inline int to_int(Label label) { return static_cast<int>(label); }
std::optional<Label> label_from_int(long long value);

// One categorical instruction feature and its full category count.
struct FeatureInfo {
  std::string_view name;
  std::uint32_t width;
};

// The 25 instruction features in interchange order with their full widths.
const std::array<FeatureInfo, kNumInstructionFeatures>& instruction_features();

// Index of a feature by name, or nullopt.
std::optional<std::size_t> feature_index(std::string_view name);

// A decoded instruction. Raw code 0 of any feature means "absent".
struct InstructionRecord {
  std::array<std::uint32_t, kNumInstructionFeatures> codes{};
  std::string mnemonic;  // display only, never serialized

  std::uint32_t opcode0() const { return codes[kOpcode0Feature]; }

  friend bool operator==(const InstructionRecord& a, const InstructionRecord& b) {
    return a.codes == b.codes;
  }
};

using NodeId = std::uint32_t;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using NodePayload = std::vector<InstructionRecord>;

// Directed attribute graph used at every pipeline level.
//
// Construction canonicalizes: nodes are sorted by id, payloads follow their
// nodes, and edges are sorted by (src, dst). Construction throws
// std::invalid_argument on dangling or duplicate edges, duplicate node ids, or
// an AFG-level node that does not carry exactly one instruction.
class SampleGraph {
 public:
  SampleGraph() = default;
  SampleGraph(std::string id, Level level, Label label, std::vector<NodeId> nodes,
              std::vector<NodePayload> payload, std::vector<Edge> edges);

  const std::string& id() const { return id_; }
  Level level() const { return level_; }
  Label label() const { return label_; }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodePayload>& payload() const { return payload_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t instruction_count() const;

  std::optional<std::size_t> index_of(NodeId node) const;

  // Edge endpoints as node indices, aligned with edges().
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edge_indices() const {
    return edge_indices_;
  }

  bool has_features() const { return has_features_; }
  const Eigen::MatrixXd& features() const { return features_; }
  std::size_t feature_width() const { return static_cast<std::size_t>(features_.cols()); }

  // Copy of this graph carrying the given node feature matrix (one row per node).
  SampleGraph with_features(Eigen::MatrixXd features) const;

  // Copy with a different level tag (payload invariants are re-checked).
  SampleGraph relabeled(Level level) const;

  friend bool operator==(const SampleGraph& a, const SampleGraph& b);

 private:
  std::string id_;
  Level level_ = Level::kCfg;
  Label label_ = Label::kBenign;
  std::vector<NodeId> nodes_;
  std::vector<NodePayload> payload_;
  std::vector<Edge> edges_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_indices_;
  Eigen::MatrixXd features_;
  bool has_features_ = false;
};

// Edge-induced subgraph: keeps exactly the listed edges (indices into
// g.edges()) and every node, so isolated nodes keep their features.
SampleGraph keep_edges(const SampleGraph& g, const std::vector<std::size_t>& edge_indices);

// Node-induced subgraph: keeps the listed nodes and every edge whose endpoints
// are both kept. Features are carried when present.
SampleGraph induced_subgraph(const SampleGraph& g, const std::vector<NodeId>& nodes, Level level);

// Weakly connected components as lists of node indices, ordered by smallest index.
std::vector<std::vector<std::size_t>> weak_components(const SampleGraph& g);

}  // namespace metacoarse

#endif  // METACOARSE_GRAPH_HPP_
