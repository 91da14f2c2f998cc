#include "metacoarse/afg.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace metacoarse {

AfgCorrespondence::AfgCorrespondence(std::vector<NodeId> cfg_nodes, std::vector<std::vector<NodeId>> lists)
    : cfg_nodes_(std::move(cfg_nodes)), lists_(std::move(lists)) {
  if (cfg_nodes_.size() != lists_.size()) throw std::invalid_argument("correspondence size mismatch");
  std::size_t total = 0;
  for (const auto& list : lists_) total += list.size();
  owners_.assign(total, {0, total});
  for (std::size_t i = 0; i < lists_.size(); ++i) {
    for (std::size_t pos = 0; pos < lists_[i].size(); ++pos) {
      const NodeId a = lists_[i][pos];
      if (a >= total || owners_[a].second != total) {
        throw std::invalid_argument("instruction lists must partition AFG ids 0..n-1");
      }
      owners_[a] = {cfg_nodes_[i], pos};
    }
  }
}

const std::vector<NodeId>& AfgCorrespondence::instruction_list(NodeId cfg_node) const {
  auto it = std::lower_bound(cfg_nodes_.begin(), cfg_nodes_.end(), cfg_node);
  if (it == cfg_nodes_.end() || *it != cfg_node) {
    throw std::out_of_range("CFG node " + std::to_string(cfg_node) + " has no instruction list");
  }
  return lists_[static_cast<std::size_t>(it - cfg_nodes_.begin())];
}

std::pair<NodeId, std::size_t> AfgCorrespondence::owner(NodeId afg_node) const {
  if (afg_node >= owners_.size()) throw std::out_of_range("unknown AFG node " + std::to_string(afg_node));
  return owners_[afg_node];
}

AfgResult build_afg(const SampleGraph& cfg) {
  std::vector<NodeId> nodes;
  std::vector<NodePayload> payload;
  std::vector<std::vector<NodeId>> lists(cfg.num_nodes());
  std::vector<Edge> edges;
  NodeId next = 0;
  for (std::size_t i = 0; i < cfg.num_nodes(); ++i) {
    NodePayload instructions = cfg.payload()[i];
    if (instructions.empty()) instructions.emplace_back();
    for (std::size_t pos = 0; pos < instructions.size(); ++pos) {
      const NodeId a = next++;
      if (pos > 0) edges.push_back({a - 1, a});
      lists[i].push_back(a);
      nodes.push_back(a);
      payload.push_back({instructions[pos]});
    }
  }
  for (auto [s, d] : cfg.edge_indices()) edges.push_back({lists[s].back(), lists[d].front()});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  SampleGraph afg(cfg.id(), Level::kAfg, cfg.label(), std::move(nodes), std::move(payload), std::move(edges));
  return {std::move(afg), AfgCorrespondence(cfg.nodes(), std::move(lists))};
}

bool DegreeReport::all_pass() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const DegreeCheck& c) { return c.pass; });
}

DegreeReport check_degree_preservation(const SampleGraph& cfg, const SampleGraph& afg,
                                       const AfgCorrespondence& correspondence) {
  std::vector<std::size_t> cfg_in(cfg.num_nodes(), 0), cfg_out(cfg.num_nodes(), 0);
  for (auto [s, d] : cfg.edge_indices()) {
    ++cfg_out[s];
    ++cfg_in[d];
  }
  std::vector<std::size_t> ext_in(afg.num_nodes(), 0), ext_out(afg.num_nodes(), 0);
  for (std::size_t e = 0; e < afg.num_edges(); ++e) {
    const Edge& edge = afg.edges()[e];
    auto [src_owner, src_pos] = correspondence.owner(edge.src);
    auto [dst_owner, dst_pos] = correspondence.owner(edge.dst);
    if (src_owner == dst_owner && dst_pos == src_pos + 1) continue;
    auto [s, d] = afg.edge_indices()[e];
    ++ext_out[s];
    ++ext_in[d];
  }

  DegreeReport report;
  for (std::size_t i = 0; i < cfg.num_nodes(); ++i) {
    DegreeCheck check;
    check.cfg_node = cfg.nodes()[i];
    check.cfg_in = cfg_in[i];
    check.cfg_out = cfg_out[i];
    auto head = afg.index_of(correspondence.head(check.cfg_node));
    auto tail = afg.index_of(correspondence.tail(check.cfg_node));
    if (head && tail) {
      check.head_external_in = ext_in[*head];
      check.tail_external_out = ext_out[*tail];
      check.pass = check.head_external_in == check.cfg_in && check.tail_external_out == check.cfg_out;
    }
    report.nodes.push_back(check);
  }
  return report;
}

}  // namespace metacoarse
