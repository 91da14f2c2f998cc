#include "metacoarse/graph.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace metacoarse {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::kCfg:
      return "CFG";
    case Level::kCoarseCfg:
      return "C_CFG";
    case Level::kAfg:
      return "AFG";
    case Level::kBacktrackedAfg:
      return "B_AFG";
  }
  return "CFG";
}

std::optional<Level> parse_level(std::string_view text) {
  if (text == "CFG") return Level::kCfg;
  if (text == "C_CFG") return Level::kCoarseCfg;
  if (text == "AFG") return Level::kAfg;
  if (text == "B_AFG") return Level::kBacktrackedAfg;
  return std::nullopt;
}

std::optional<Label> label_from_int(long long value) {
  if (value == 0) return Label::kBenign;
  if (value == 1) return Label::kMalicious;
  return std::nullopt;
}

const std::array<FeatureInfo, kNumInstructionFeatures>& instruction_features() {
  static const std::array<FeatureInfo, kNumInstructionFeatures> table = {{
      {"prefix_0", 2},       {"prefix_1", 4},     {"prefix_2", 7},   {"prefix_3", 2},
      {"opcode_0", 200},     {"opcode_1", 191},   {"opcode_2", 37},  {"opcode_3", 1},
      {"rex", 17},           {"addr_size", 3},    {"modrm", 256},    {"sib", 255},
      {"sib_scale", 21},     {"xop_cc", 5},       {"sse_cc", 21},    {"avx_cc", 1},
      {"avx_sae", 1},        {"avx_rm", 5},       {"eflags", 1},     {"fpu_flags", 1},
      {"modrm_offset", 10},  {"disp_offset", 12}, {"disp_size", 5},  {"imm_offset", 10},
      {"imm_size", 5},
  }};
  return table;
}

std::optional<std::size_t> feature_index(std::string_view name) {
  const auto& table = instruction_features();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].name == name) return i;
  }
  return std::nullopt;
}

namespace {

bool single_instruction_level(Level level) {
  return level == Level::kAfg || level == Level::kBacktrackedAfg;
}

}  // namespace

SampleGraph::SampleGraph(std::string id, Level level, Label label, std::vector<NodeId> nodes,
                         std::vector<NodePayload> payload, std::vector<Edge> edges)
    : id_(std::move(id)), level_(level), label_(label) {
  if (payload.size() != nodes.size()) {
    throw std::invalid_argument("sample " + id_ + ": payload count differs from node count");
  }
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
  nodes_.reserve(nodes.size());
  payload_.reserve(nodes.size());
  for (std::size_t i : order) {
    if (!nodes_.empty() && nodes_.back() == nodes[i]) {
      throw std::invalid_argument("sample " + id_ + ": duplicate node " + std::to_string(nodes[i]));
    }
    nodes_.push_back(nodes[i]);
    payload_.push_back(std::move(payload[i]));
  }
  if (single_instruction_level(level_)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (payload_[i].size() != 1) {
        throw std::invalid_argument("sample " + id_ + ": node " + std::to_string(nodes_[i]) +
                                    " must carry exactly one instruction at level " +
                                    std::string(to_string(level_)));
      }
    }
  }

  std::sort(edges.begin(), edges.end());
  edges_.reserve(edges.size());
  edge_indices_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (!edges_.empty() && edges_.back() == e) {
      throw std::invalid_argument("sample " + id_ + ": duplicate edge " + std::to_string(e.src) + "->" +
                                  std::to_string(e.dst));
    }
    auto s = index_of(e.src);
    auto d = index_of(e.dst);
    if (!s || !d) {
      throw std::invalid_argument("sample " + id_ + ": edge " + std::to_string(e.src) + "->" +
                                  std::to_string(e.dst) + " references a missing node");
    }
    edges_.push_back(e);
    edge_indices_.emplace_back(static_cast<std::uint32_t>(*s), static_cast<std::uint32_t>(*d));
  }
}

std::size_t SampleGraph::instruction_count() const {
  std::size_t total = 0;
  for (const auto& p : payload_) total += p.size();
  return total;
}

std::optional<std::size_t> SampleGraph::index_of(NodeId node) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node);
  if (it == nodes_.end() || *it != node) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

SampleGraph SampleGraph::with_features(Eigen::MatrixXd features) const {
  if (static_cast<std::size_t>(features.rows()) != nodes_.size()) {
    throw std::invalid_argument("sample " + id_ + ": feature rows do not match node count");
  }
  SampleGraph copy = *this;
  copy.features_ = std::move(features);
  copy.has_features_ = true;
  return copy;
}

SampleGraph SampleGraph::relabeled(Level level) const {
  SampleGraph copy = *this;
  copy.level_ = level;
  if (single_instruction_level(level)) {
    for (const auto& p : copy.payload_) {
      if (p.size() != 1) throw std::invalid_argument("sample " + id_ + ": cannot relabel to single-instruction level");
    }
  }
  return copy;
}

bool operator==(const SampleGraph& a, const SampleGraph& b) {
  if (a.id_ != b.id_ || a.level_ != b.level_ || a.label_ != b.label_ || a.nodes_ != b.nodes_ ||
      a.edges_ != b.edges_ || a.payload_ != b.payload_ || a.has_features_ != b.has_features_) {
    return false;
  }
  if (!a.has_features_) return true;
  return a.features_.rows() == b.features_.rows() && a.features_.cols() == b.features_.cols() &&
         a.features_ == b.features_;
}

SampleGraph keep_edges(const SampleGraph& g, const std::vector<std::size_t>& edge_indices) {
  std::vector<Edge> edges;
  edges.reserve(edge_indices.size());
  for (std::size_t e : edge_indices) edges.push_back(g.edges().at(e));
  SampleGraph out(g.id(), g.level(), g.label(), g.nodes(), g.payload(), std::move(edges));
  if (g.has_features()) return out.with_features(g.features());
  return out;
}

SampleGraph induced_subgraph(const SampleGraph& g, const std::vector<NodeId>& nodes, Level level) {
  std::vector<char> keep(g.num_nodes(), 0);
  for (NodeId n : nodes) {
    auto idx = g.index_of(n);
    if (!idx) throw std::invalid_argument("sample " + g.id() + ": unknown node " + std::to_string(n));
    keep[*idx] = 1;
  }
  std::vector<NodeId> kept_nodes;
  std::vector<NodePayload> kept_payload;
  std::vector<std::size_t> kept_rows;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (!keep[i]) continue;
    kept_nodes.push_back(g.nodes()[i]);
    kept_payload.push_back(g.payload()[i]);
    kept_rows.push_back(i);
  }
  std::vector<Edge> kept_edges;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    auto [s, d] = g.edge_indices()[e];
    if (keep[s] && keep[d]) kept_edges.push_back(g.edges()[e]);
  }
  SampleGraph out(g.id(), level, g.label(), std::move(kept_nodes), std::move(kept_payload),
                  std::move(kept_edges));
  if (!g.has_features()) return out;
  Eigen::MatrixXd features(static_cast<Eigen::Index>(kept_rows.size()), g.features().cols());
  for (std::size_t r = 0; r < kept_rows.size(); ++r) {
    features.row(static_cast<Eigen::Index>(r)) = g.features().row(static_cast<Eigen::Index>(kept_rows[r]));
  }
  return out.with_features(std::move(features));
}

std::vector<std::vector<std::size_t>> weak_components(const SampleGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (auto [s, d] : g.edge_indices()) {
    std::size_t a = find(s), b = find(d);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t root = find(i);
    if (slot[root] == n) {
      slot[root] = components.size();
      components.emplace_back();
    }
    components[slot[root]].push_back(i);
  }
  return components;
}

}  // namespace metacoarse
