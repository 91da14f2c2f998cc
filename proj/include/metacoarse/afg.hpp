#ifndef METACOARSE_AFG_HPP_
#define METACOARSE_AFG_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "metacoarse/graph.hpp"

namespace metacoarse {

// Maps every CFG node to its instruction list in the AFG and back.
class AfgCorrespondence {
 public:
  AfgCorrespondence() = default;
  AfgCorrespondence(std::vector<NodeId> cfg_nodes, std::vector<std::vector<NodeId>> lists);

  const std::vector<NodeId>& cfg_nodes() const { return cfg_nodes_; }

  // AFG nodes of a CFG node, head to tail. Throws std::out_of_range for unknown nodes.
  const std::vector<NodeId>& instruction_list(NodeId cfg_node) const;
  NodeId head(NodeId cfg_node) const { return instruction_list(cfg_node).front(); }
  NodeId tail(NodeId cfg_node) const { return instruction_list(cfg_node).back(); }

  // (CFG node, position in its list) of an AFG node.
  std::pair<NodeId, std::size_t> owner(NodeId afg_node) const;

  std::size_t num_afg_nodes() const { return owners_.size(); }

 private:
  std::vector<NodeId> cfg_nodes_;  // sorted
  std::vector<std::vector<NodeId>> lists_;
  std::vector<std::pair<NodeId, std::size_t>> owners_;  // indexed by AFG node id
};

struct AfgResult {
  SampleGraph afg;
  AfgCorrespondence correspondence;
};

// Replaces every CFG node by a path over its instructions. AFG node ids are
// assigned consecutively in CFG node order, head to tail. A CFG edge (u, v)
// becomes tail(u) -> head(v). A node without instructions becomes one
// placeholder node carrying the all-absent instruction.
AfgResult build_afg(const SampleGraph& cfg);

struct DegreeCheck {
  NodeId cfg_node = 0;
  std::size_t cfg_in = 0;
  std::size_t cfg_out = 0;
  std::size_t head_external_in = 0;
  std::size_t tail_external_out = 0;
  bool pass = false;
};

struct DegreeReport {
  std::vector<DegreeCheck> nodes;

  bool all_pass() const;
};

// Checks that each CFG node's in-degree reappears on its list head and its
// out-degree on its list tail, counting only edges that are not intra-list
// path edges.
DegreeReport check_degree_preservation(const SampleGraph& cfg, const SampleGraph& afg,
                                       const AfgCorrespondence& correspondence);

}  // namespace metacoarse

#endif  // METACOARSE_AFG_HPP_
