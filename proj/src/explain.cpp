#include "metacoarse/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "metacoarse/metrics.hpp"
#include "metacoarse/train.hpp"

namespace metacoarse {

Eigen::VectorXd integrated_gradients(const GcnModel& model, const SampleGraph& g, std::size_t steps) {
  if (steps < 1) throw std::invalid_argument("integrated gradients needs at least one step");
  const auto m = static_cast<Eigen::Index>(g.num_edges());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(m);
  if (m == 0) return total;

  const GraphBatch batch = make_batch(g);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  const int target = to_int(argmax_label(gcn_forward(model, batch, ones).logits.row(0).transpose()));
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(1, kNumClasses);
  dlogits(0, target) = 1.0;
  for (std::size_t t = 1; t <= steps; ++t) {
    const double alpha = (static_cast<double>(t) - 0.5) / static_cast<double>(steps);
    const Eigen::VectorXd mask = Eigen::VectorXd::Constant(m, alpha);
    const ForwardResult fwd = gcn_forward(model, batch, mask);
    total += gcn_backward(model, batch, mask, fwd, dlogits, true).edge_mask;
  }
  // (input - baseline) is 1 for every mask entry.
  return total / static_cast<double>(steps);
}

IntegratedGradients::IntegratedGradients(std::size_t steps) : steps_(steps) {
  if (steps < 1) throw std::invalid_argument("integrated gradients needs at least one step");
}

Eigen::VectorXd IntegratedGradients::attribute(const GcnModel& model, const SampleGraph& g) const {
  return integrated_gradients(model, g, steps_);
}

std::size_t tes_node_budget(std::size_t num_nodes, std::size_t first_edge_nodes, double epsilon) {
  if (num_nodes == 0) return 0;
  const double n = static_cast<double>(num_nodes);
  // The small slack keeps products like 0.1 * 30 from rounding up to 4.
  const auto share = static_cast<std::size_t>(std::ceil(epsilon * n - 1e-9));
  const auto floor_budget = std::max(static_cast<std::size_t>(std::ceil(std::log2(n) - 1e-9)), first_edge_nodes);
  return std::min(std::max(share, floor_budget), num_nodes);
}

ExplanationMask select_tes(const SampleGraph& g, const Eigen::VectorXd& attribution, const SelectionPolicy& policy) {
  if (!(policy.epsilon > 0.0 && policy.epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  const std::size_t m = g.num_edges();
  if (static_cast<std::size_t>(attribution.size()) != m) {
    throw std::invalid_argument("sample " + g.id() + ": " + std::to_string(attribution.size()) +
                                " attributions for " + std::to_string(m) + " edges");
  }
  if (!attribution.allFinite()) throw std::invalid_argument("sample " + g.id() + ": non-finite attribution");

  ExplanationMask mask;
  mask.sample_id = g.id();
  mask.edges = g.edges();
  mask.attribution = attribution;
  mask.ranked.resize(m);
  std::iota(mask.ranked.begin(), mask.ranked.end(), std::size_t{0});
  // Edges are stored sorted by (src, dst), so index order is the tie-break.
  std::stable_sort(mask.ranked.begin(), mask.ranked.end(),
                   [&](std::size_t a, std::size_t b) { return attribution[static_cast<Eigen::Index>(a)] >
                                                              attribution[static_cast<Eigen::Index>(b)]; });

  if (m == 0) {
    mask.selected_nodes = g.nodes();
    return mask;
  }
  const Edge& first = g.edges()[mask.ranked.front()];
  const std::size_t budget = tes_node_budget(g.num_nodes(), first.src == first.dst ? 1 : 2, policy.epsilon);
  std::set<NodeId> touched;
  std::vector<char> chosen(m, 0);
  for (std::size_t e : mask.ranked) {
    if (touched.size() >= budget) break;
    chosen[e] = 1;
    touched.insert(g.edges()[e].src);
    touched.insert(g.edges()[e].dst);
  }
  for (std::size_t e = 0; e < m; ++e) (chosen[e] ? mask.selected_edges : mask.unimportant_edges).push_back(e);
  mask.selected_nodes.assign(touched.begin(), touched.end());
  return mask;
}

SampleGraph selected_subgraph(const SampleGraph& g, const ExplanationMask& mask) {
  return keep_edges(g, mask.selected_edges);
}

SampleGraph unimportant_subgraph(const SampleGraph& g, const ExplanationMask& mask) {
  return keep_edges(g, mask.unimportant_edges);
}

FidelityOutcome fidelity_outcome(const GcnModel& model, const SampleGraph& g, const ExplanationMask& mask) {
  const Label full = predict(model, g).label;
  FidelityOutcome out;
  out.removed_matches = predict(model, unimportant_subgraph(g, mask)).label == full;
  out.kept_matches = predict(model, selected_subgraph(g, mask)).label == full;
  return out;
}

std::string ExplanationMask::to_json() const {
  nlohmann::ordered_json out;
  out["id"] = sample_id;
  std::vector<char> selected(edges.size(), 0);
  for (std::size_t e : selected_edges) selected[e] = 1;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    list.push_back({edges[e].src, edges[e].dst, attribution[static_cast<Eigen::Index>(e)], selected[e] != 0});
  }
  out["edges"] = std::move(list);
  out["ranked"] = ranked;
  out["selected_nodes"] = selected_nodes;
  return out.dump();
}

ExplanationMask ExplanationMask::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  ExplanationMask mask;
  mask.sample_id = in.at("id").get<std::string>();
  const auto& list = in.at("edges");
  mask.attribution.resize(static_cast<Eigen::Index>(list.size()));
  for (std::size_t e = 0; e < list.size(); ++e) {
    mask.edges.push_back({list[e].at(0).get<NodeId>(), list[e].at(1).get<NodeId>()});
    mask.attribution[static_cast<Eigen::Index>(e)] = list[e].at(2).get<double>();
    (list[e].at(3).get<bool>() ? mask.selected_edges : mask.unimportant_edges).push_back(e);
  }
  mask.ranked = in.at("ranked").get<std::vector<std::size_t>>();
  mask.selected_nodes = in.at("selected_nodes").get<std::vector<NodeId>>();
  return mask;
}

std::vector<CurvePoint> characterization_curve(const GcnModel& model, std::span<const SampleGraph> samples,
                                               std::span<const Eigen::VectorXd> attributions,
                                               std::vector<double> epsilon_grid) {
  if (samples.empty()) throw std::invalid_argument("characterization curve needs at least one sample");
  if (samples.size() != attributions.size()) throw std::invalid_argument("one attribution vector per sample expected");
  std::sort(epsilon_grid.begin(), epsilon_grid.end());
  epsilon_grid.erase(std::unique(epsilon_grid.begin(), epsilon_grid.end()), epsilon_grid.end());

  std::vector<CurvePoint> curve;
  for (double eps : epsilon_grid) {
    std::vector<bool> removed, kept;
    double fraction = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const ExplanationMask mask = select_tes(samples[i], attributions[i], {SelectionMethod::kTes, eps});
      const FidelityOutcome o = fidelity_outcome(model, samples[i], mask);
      removed.push_back(o.removed_matches);
      kept.push_back(o.kept_matches);
      fraction += static_cast<double>(mask.selected_nodes.size()) / static_cast<double>(samples[i].num_nodes());
    }
    const FidelityScores fid = fidelity_scores(removed, kept);
    CurvePoint p;
    p.epsilon = eps;
    p.fid_plus = fid.fid_plus;
    p.fid_minus = fid.fid_minus;
    p.charact = characterization(fid);
    p.mean_selected_fraction = fraction / static_cast<double>(samples.size());
    p.samples = samples.size();
    curve.push_back(p);
  }
  return curve;
}

}  // namespace metacoarse
