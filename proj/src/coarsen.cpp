#include "metacoarse/coarsen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "metacoarse/log.hpp"

namespace metacoarse {

namespace {

constexpr double kNullEigenvalue = 1e-10;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

std::string_view to_string(CoarseningMethod method) {
  switch (method) {
    case CoarseningMethod::kIdentity:
      return "identity";
    case CoarseningMethod::kKron:
      return "kron";
    case CoarseningMethod::kVariationEdges:
      return "variation_edges";
  }
  return "identity";
}

std::optional<CoarseningMethod> parse_coarsening_method(std::string_view text) {
  if (text == "identity" || text == "baseline") return CoarseningMethod::kIdentity;
  if (text == "kron") return CoarseningMethod::kKron;
  if (text == "variation_edges") return CoarseningMethod::kVariationEdges;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// CoarseningMap

CoarseningMap::CoarseningMap(CoarseningMethod method, double ratio, std::vector<NodeId> original_nodes,
                             const std::vector<std::size_t>& labels)
    : method_(method), ratio_(ratio), original_nodes_(std::move(original_nodes)) {
  if (labels.size() != original_nodes_.size()) throw std::invalid_argument("coarsening labels size mismatch");
  if (!std::is_sorted(original_nodes_.begin(), original_nodes_.end())) {
    throw std::invalid_argument("coarsening map expects sorted original nodes");
  }
  std::vector<std::pair<std::size_t, std::size_t>> renumber;  // (label, supernode)
  assignment_.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find_if(renumber.begin(), renumber.end(), [&](const auto& p) { return p.first == labels[i]; });
    std::size_t s;
    if (it == renumber.end()) {
      s = blocks_.size();
      renumber.emplace_back(labels[i], s);
      blocks_.emplace_back();
    } else {
      s = it->second;
    }
    assignment_[i] = s;
    blocks_[s].push_back(original_nodes_[i]);
  }
}

CoarseningMap CoarseningMap::identity(std::span<const NodeId> nodes, CoarseningMethod method, double ratio) {
  std::vector<std::size_t> labels(nodes.size());
  std::iota(labels.begin(), labels.end(), std::size_t{0});
  return CoarseningMap(method, ratio, std::vector<NodeId>(nodes.begin(), nodes.end()), labels);
}

const std::vector<NodeId>& CoarseningMap::block(std::size_t supernode) const {
  if (supernode >= blocks_.size()) throw std::out_of_range("unknown supernode " + std::to_string(supernode));
  return blocks_[supernode];
}

std::size_t CoarseningMap::supernode_of(NodeId original) const {
  auto it = std::lower_bound(original_nodes_.begin(), original_nodes_.end(), original);
  if (it == original_nodes_.end() || *it != original) {
    throw std::out_of_range("node " + std::to_string(original) + " is not covered by the coarsening map");
  }
  return assignment_[static_cast<std::size_t>(it - original_nodes_.begin())];
}

std::string CoarseningMap::to_json() const {
  nlohmann::ordered_json out;
  out["method"] = std::string(to_string(method_));
  out["ratio"] = ratio_;
  out["spectral_fallback"] = spectral_fallback;
  out["blocks"] = blocks_;
  nlohmann::ordered_json kron = nlohmann::ordered_json::array();
  for (const WeightedEdge& e : kron_edges) kron.push_back({e.a, e.b, e.weight});
  out["kron_edges"] = std::move(kron);
  return out.dump();
}

CoarseningMap CoarseningMap::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  auto method = parse_coarsening_method(in.at("method").get<std::string>());
  if (!method) throw std::runtime_error("unknown coarsening method " + in.at("method").dump());
  const auto blocks = in.at("blocks").get<std::vector<std::vector<NodeId>>>();
  std::vector<std::pair<NodeId, std::size_t>> members;
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    if (blocks[s].empty()) throw std::runtime_error("coarsening map has an empty block");
    for (NodeId n : blocks[s]) members.emplace_back(n, s);
  }
  std::sort(members.begin(), members.end());
  std::vector<NodeId> nodes;
  std::vector<std::size_t> labels;
  for (auto [n, s] : members) {
    if (!nodes.empty() && nodes.back() == n) throw std::runtime_error("node listed in two blocks");
    nodes.push_back(n);
    labels.push_back(s);
  }
  CoarseningMap map(*method, in.at("ratio").get<double>(), std::move(nodes), labels);
  if (map.blocks_ != blocks) throw std::runtime_error("coarsening map blocks are not in canonical order");
  map.spectral_fallback = in.value("spectral_fallback", false);
  for (const auto& e : in.at("kron_edges")) {
    map.kron_edges.push_back({e.at(0).get<NodeId>(), e.at(1).get<NodeId>(), e.at(2).get<double>()});
  }
  return map;
}

// ---------------------------------------------------------------------------
// Linear algebra helpers

std::size_t coarse_size_bound(std::size_t n, double r) {
  if (n == 0) return 0;
  const double raw = (1.0 - r) * static_cast<double>(n);
  auto bound = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(bound, 1, n);
}

Eigen::MatrixXd symmetrized_adjacency(const SampleGraph& g) {
  const auto n = ix(g.num_nodes());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (auto [s, d] : g.edge_indices()) {
    if (s == d) continue;
    W(s, d) = 1.0;
    W(d, s) = 1.0;
  }
  return W;
}

Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency) {
  Eigen::MatrixXd L = -adjacency;
  L.diagonal() = adjacency.rowwise().sum();
  return L;
}

Eigen::MatrixXd kron_reduce(const Eigen::MatrixXd& L, std::span<const std::size_t> kept) {
  const std::size_t n = static_cast<std::size_t>(L.rows());
  std::vector<char> is_kept(n, 0);
  for (std::size_t k : kept) {
    if (k >= n) throw std::out_of_range("kron_reduce: kept index out of range");
    is_kept[k] = 1;
  }
  std::vector<std::size_t> elim;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_kept[i]) elim.push_back(i);
  }
  const auto nk = ix(kept.size());
  const auto ne = ix(elim.size());
  Eigen::MatrixXd Lkk(nk, nk), Lke(nk, ne), Lee(ne, ne);
  for (Eigen::Index a = 0; a < nk; ++a) {
    for (Eigen::Index b = 0; b < nk; ++b) Lkk(a, b) = L(ix(kept[a]), ix(kept[b]));
    for (Eigen::Index b = 0; b < ne; ++b) Lke(a, b) = L(ix(kept[a]), ix(elim[b]));
  }
  for (Eigen::Index a = 0; a < ne; ++a) {
    for (Eigen::Index b = 0; b < ne; ++b) Lee(a, b) = L(ix(elim[a]), ix(elim[b]));
  }
  if (ne == 0) return Lkk;
  Eigen::MatrixXd reduced = Lkk - Lke * Lee.ldlt().solve(Lke.transpose());
  return (reduced + reduced.transpose()) / 2.0;
}

std::vector<std::size_t> kron_kept_set(const Eigen::MatrixXd& L, std::size_t min_kept) {
  const auto m = static_cast<std::size_t>(L.rows());
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (m <= 1) return all;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
  Eigen::VectorXd v;
  if (solver.info() == Eigen::Success) {
    v = solver.eigenvectors().col(ix(m - 1));
  } else {
    v = L.diagonal();  // degree ordering as a last resort
    v.array() -= v.mean();
  }
  Eigen::Index peak = 0;
  v.cwiseAbs().maxCoeff(&peak);
  if (v[peak] < 0) v = -v;

  std::vector<std::size_t> by_value = all;
  std::stable_sort(by_value.begin(), by_value.end(), [&](std::size_t a, std::size_t b) { return v[ix(a)] > v[ix(b)]; });

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < m; ++i) {
    if (v[ix(i)] >= 0.0) kept.push_back(i);
  }
  if (kept.size() == m) kept.assign(by_value.begin(), by_value.begin() + static_cast<std::ptrdiff_t>((m + 1) / 2));
  if (kept.size() < min_kept) {
    std::set<std::size_t> current(kept.begin(), kept.end());
    for (std::size_t i : by_value) {
      if (current.size() >= std::min(min_kept, m)) break;
      current.insert(i);
    }
    kept.assign(current.begin(), current.end());
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::optional<Eigen::MatrixXd> spectral_basis(const Eigen::MatrixXd& L, std::size_t k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
  if (solver.info() != Eigen::Success) return std::nullopt;
  k = std::min<std::size_t>(k, static_cast<std::size_t>(L.rows()));
  Eigen::MatrixXd basis = solver.eigenvectors().leftCols(ix(k));
  for (std::size_t c = 0; c < k; ++c) {
    const double lambda = solver.eigenvalues()[ix(c)];
    basis.col(ix(c)) *= lambda < kNullEigenvalue ? 0.0 : 1.0 / std::sqrt(lambda);
  }
  if (!basis.allFinite()) return std::nullopt;
  return basis;
}

double variation_edge_cost(const Eigen::MatrixXd& W, const Eigen::MatrixXd& A, std::size_t i, std::size_t j) {
  const double w = W(ix(i), ix(j));
  const double deg_i = W.row(ix(i)).sum();
  const double deg_j = W.row(ix(j)).sum();
  Eigen::Matrix2d local;
  local << 2.0 * deg_i - w, -w, -w, 2.0 * deg_j - w;
  // Pi = I - 11^T/2 applied to the two basis rows.
  Eigen::MatrixXd projected(2, A.cols());
  projected.row(0) = (A.row(ix(i)) - A.row(ix(j))) / 2.0;
  projected.row(1) = -projected.row(0);
  return (projected.transpose() * local * projected).norm();
}

// ---------------------------------------------------------------------------
// Coarsening drivers

namespace {

// Splits `total` supernodes over components: one each, the rest proportional
// to component size minus one, leftovers by largest remainder.
std::vector<std::size_t> allocate_targets(const std::vector<std::vector<std::size_t>>& components,
                                          std::size_t total) {
  const std::size_t c = components.size();
  std::size_t n = 0;
  for (const auto& comp : components) n += comp.size();
  total = std::clamp(total, c, n);
  std::vector<std::size_t> targets(c, 1);
  const std::size_t spare = total - c;
  const std::size_t capacity = n - c;
  if (spare == 0 || capacity == 0) return targets;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < c; ++i) {
    const double share = static_cast<double>(spare) * static_cast<double>(components[i].size() - 1) /
                         static_cast<double>(capacity);
    const auto whole = static_cast<std::size_t>(std::floor(share));
    targets[i] += whole;
    assigned += whole;
    remainders.emplace_back(share - static_cast<double>(whole), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [rem, i] : remainders) {
    if (assigned >= spare) break;
    if (targets[i] < components[i].size()) {
      ++targets[i];
      ++assigned;
    }
  }
  return targets;
}

Eigen::MatrixXd component_adjacency(const Eigen::MatrixXd& W, const std::vector<std::size_t>& comp) {
  const auto m = ix(comp.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = W(ix(comp[a]), ix(comp[b]));
  }
  return sub;
}

struct Candidate {
  double cost;
  std::size_t i;
  std::size_t j;
};

// Greedy minimum-cost matching of at most `need` edges. When the greedy
// matching is maximal but short, length-3 augmenting swaps (replace u-v by
// a-u and v-b) are applied by least added cost until `need` is met.
std::vector<std::size_t> match_edges(std::size_t m, std::vector<Candidate> candidates, std::size_t need) {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.cost, a.i, a.j) < std::tie(b.cost, b.i, b.j);
  });
  std::vector<std::size_t> partner(m, kNone);
  std::size_t matched = 0;
  for (const Candidate& c : candidates) {
    if (matched >= need) break;
    if (partner[c.i] != kNone || partner[c.j] != kNone) continue;
    partner[c.i] = c.j;
    partner[c.j] = c.i;
    ++matched;
  }
  if (matched >= need) return partner;

  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(ix(m), ix(m), inf);
  std::vector<std::vector<std::size_t>> nbrs(m);
  for (const Candidate& c : candidates) {
    cost(ix(c.i), ix(c.j)) = cost(ix(c.j), ix(c.i)) = c.cost;
    nbrs[c.i].push_back(c.j);
    nbrs[c.j].push_back(c.i);
  }
  for (auto& list : nbrs) std::sort(list.begin(), list.end());

  while (matched < need) {
    double best = inf;
    std::size_t bu = kNone, bv = kNone, ba = kNone, bb = kNone;
    for (std::size_t u = 0; u < m; ++u) {
      const std::size_t v = partner[u];
      if (v == kNone) continue;
      for (std::size_t a : nbrs[u]) {
        if (partner[a] != kNone) continue;
        for (std::size_t b : nbrs[v]) {
          if (partner[b] != kNone || b == a) continue;
          const double delta = cost(ix(a), ix(u)) + cost(ix(v), ix(b)) - cost(ix(u), ix(v));
          if (delta < best) {
            best = delta;
            std::tie(bu, bv, ba, bb) = std::tie(u, v, a, b);
          }
        }
      }
    }
    if (bu == kNone) break;
    partner[ba] = bu;
    partner[bu] = ba;
    partner[bv] = bb;
    partner[bb] = bv;
    ++matched;
  }
  return partner;
}

std::vector<std::size_t> variation_edges_component(const Eigen::MatrixXd& W0, std::size_t target, std::size_t k,
                                                   bool& fallback) {
  const std::size_t n = static_cast<std::size_t>(W0.rows());
  std::vector<std::size_t> labels(n);
  std::iota(labels.begin(), labels.end(), std::size_t{0});
  if (n <= target || n < 2) return labels;

  Eigen::MatrixXd W = W0;
  Eigen::MatrixXd B, A;
  bool spectral = false;
  if (auto basis = spectral_basis(laplacian(W), std::clamp<std::size_t>(k, 1, n - 1))) {
    B = *basis;
    A = B;
    spectral = true;
  } else {
    fallback = true;
  }

  while (static_cast<std::size_t>(W.rows()) > target) {
    const auto m = static_cast<std::size_t>(W.rows());
    const Eigen::VectorXd deg = W.rowwise().sum();
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const double w = W(ix(i), ix(j));
        if (w <= 0.0) continue;
        const double cost = spectral ? variation_edge_cost(W, A, i, j) : -w / std::max(deg[ix(i)], deg[ix(j)]);
        candidates.push_back({cost, i, j});
      }
    }
    const std::vector<std::size_t> partner = match_edges(m, std::move(candidates), m - target);

    std::vector<std::size_t> next_label(m, kNone);
    std::size_t next = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (next_label[i] != kNone) continue;
      next_label[i] = next;
      if (partner[i] != kNone) next_label[partner[i]] = next;
      ++next;
    }
    if (next == m) break;

    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ix(m), ix(next));
    std::vector<double> block_size(next, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      P(ix(i), ix(next_label[i])) = 1.0;
      block_size[next_label[i]] += 1.0;
    }
    Eigen::MatrixXd Wc = P.transpose() * W * P;
    Wc.diagonal().setZero();
    for (std::size_t& l : labels) l = next_label[l];

    if (spectral) {
      Eigen::MatrixXd C = P.transpose();
      for (std::size_t s = 0; s < next; ++s) C.row(ix(s)) /= std::sqrt(block_size[s]);
      B = C * B;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B.transpose() * laplacian(Wc) * B);
      if (solver.info() != Eigen::Success) {
        spectral = false;
        fallback = true;
      } else {
        Eigen::VectorXd scale = solver.eigenvalues();
        for (Eigen::Index c = 0; c < scale.size(); ++c) {
          scale[c] = scale[c] < kNullEigenvalue ? 0.0 : 1.0 / std::sqrt(scale[c]);
        }
        A = B * solver.eigenvectors() * scale.asDiagonal();
      }
    }
    W = std::move(Wc);
  }
  return labels;
}

struct KronComponent {
  std::vector<std::size_t> labels;  // per local node: position in `kept`
  std::vector<std::size_t> kept;    // surviving local nodes, ascending
  Eigen::MatrixXd reduced;          // Laplacian over `kept`
};

KronComponent kron_component(const Eigen::MatrixXd& L0, const std::vector<NodeId>& ids, std::size_t target) {
  const std::size_t n = static_cast<std::size_t>(L0.rows());
  KronComponent out;
  out.labels.resize(n);
  std::iota(out.labels.begin(), out.labels.end(), std::size_t{0});
  out.kept = out.labels;
  out.reduced = L0;

  while (out.kept.size() > std::max<std::size_t>(target, 1)) {
    const Eigen::MatrixXd& L = out.reduced;
    const std::size_t m = out.kept.size();
    std::vector<std::size_t> kept = kron_kept_set(L, target);
    if (kept.size() >= m) break;

    std::vector<std::size_t> elim;
    {
      std::vector<char> is_kept(m, 0);
      for (std::size_t k : kept) is_kept[k] = 1;
      for (std::size_t i = 0; i < m; ++i) {
        if (!is_kept[i]) elim.push_back(i);
      }
    }
    // Harmonic extension weights -Lee^{-1} Lek, used when an eliminated node
    // has no direct coupling to any kept node.
    Eigen::MatrixXd Lee(ix(elim.size()), ix(elim.size())), Lek(ix(elim.size()), ix(kept.size()));
    for (std::size_t a = 0; a < elim.size(); ++a) {
      for (std::size_t b = 0; b < elim.size(); ++b) Lee(ix(a), ix(b)) = L(ix(elim[a]), ix(elim[b]));
      for (std::size_t b = 0; b < kept.size(); ++b) Lek(ix(a), ix(b)) = L(ix(elim[a]), ix(kept[b]));
    }
    const Eigen::MatrixXd harmonic = -Lee.ldlt().solve(Lek);

    std::vector<std::size_t> next(m, kNone);
    for (std::size_t p = 0; p < kept.size(); ++p) next[kept[p]] = p;
    const double tol = 1e-12 * std::max(1.0, L.cwiseAbs().maxCoeff());
    for (std::size_t a = 0; a < elim.size(); ++a) {
      const bool direct = (-Lek.row(ix(a))).maxCoeff() > tol;
      std::size_t best = 0;
      double best_value = -std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < kept.size(); ++p) {
        const double value = direct ? -Lek(ix(a), ix(p)) : harmonic(ix(a), ix(p));
        // Kept positions ascend with node id, so strict > keeps the smallest id on ties.
        if (value > best_value + tol) {
          best_value = value;
          best = p;
        }
      }
      next[elim[a]] = best;
    }

    for (std::size_t& l : out.labels) l = next[l];
    std::vector<std::size_t> survivors;
    for (std::size_t k : kept) survivors.push_back(out.kept[k]);
    out.reduced = kron_reduce(L, kept);
    out.kept = std::move(survivors);
  }
  (void)ids;
  return out;
}

std::vector<NodePayload> concatenated_payload(const SampleGraph& g, const CoarseningMap& map) {
  std::vector<NodePayload> payload(map.num_supernodes());
  for (std::size_t s = 0; s < map.num_supernodes(); ++s) {
    for (NodeId n : map.block(s)) {
      const NodePayload& p = g.payload()[*g.index_of(n)];
      payload[s].insert(payload[s].end(), p.begin(), p.end());
    }
  }
  return payload;
}

std::vector<NodeId> supernode_ids(std::size_t count) {
  std::vector<NodeId> ids(count);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  return ids;
}

std::set<Edge> inter_block_edges(const SampleGraph& g, const CoarseningMap& map) {
  std::set<Edge> edges;
  for (const Edge& e : g.edges()) {
    const auto s = static_cast<NodeId>(map.supernode_of(e.src));
    const auto d = static_cast<NodeId>(map.supernode_of(e.dst));
    if (s != d) edges.insert({s, d});
  }
  return edges;
}

CoarseningResult assemble(const SampleGraph& g, CoarseningMap map) {
  std::set<Edge> edges = inter_block_edges(g, map);
  SampleGraph coarse(g.id(), Level::kCoarseCfg, g.label(), supernode_ids(map.num_supernodes()),
                     concatenated_payload(g, map), std::vector<Edge>(edges.begin(), edges.end()));
  return {std::move(coarse), std::move(map)};
}

}  // namespace

CoarseningResult coarsen_identity(const SampleGraph& g) {
  CoarseningMap map = CoarseningMap::identity(g.nodes());
  std::vector<Edge> edges;
  for (auto [s, d] : g.edge_indices()) edges.push_back({s, d});
  SampleGraph coarse(g.id(), Level::kCoarseCfg, g.label(), supernode_ids(g.num_nodes()), g.payload(), std::move(edges));
  return {std::move(coarse), std::move(map)};
}

CoarseningResult coarsen_variation_edges(const SampleGraph& g, double r, std::optional<std::size_t> k_subspace) {
  if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("coarsening ratio must lie in [0, 1)");
  const std::size_t n = g.num_nodes();
  const auto components = weak_components(g);
  const std::size_t total = std::max(coarse_size_bound(n, r), components.size());
  if (r == 0.0 || n <= total) {
    CoarseningResult result = coarsen_identity(g);
    result.map = CoarseningMap::identity(g.nodes(), CoarseningMethod::kVariationEdges, r);
    return result;
  }

  const Eigen::MatrixXd W = symmetrized_adjacency(g);
  const std::vector<std::size_t> targets = allocate_targets(components, total);
  std::vector<std::size_t> labels(n, kNone);
  bool fallback = false;
  std::size_t offset = 0;
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& comp = components[c];
    const std::size_t k = k_subspace.value_or(std::min<std::size_t>(comp.size() - 1, 10));
    const auto local = variation_edges_component(component_adjacency(W, comp), targets[c], k, fallback);
    for (std::size_t a = 0; a < comp.size(); ++a) labels[comp[a]] = offset + local[a];
    offset += comp.size();
  }
  if (fallback) log_warning("sample " + g.id() + ": eigensolver failed, used heavy-edge ranking");

  CoarseningMap map(CoarseningMethod::kVariationEdges, r, g.nodes(), labels);
  map.spectral_fallback = fallback;
  return assemble(g, std::move(map));
}

CoarseningResult coarsen_kron(const SampleGraph& g, double r) {
  if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("coarsening ratio must lie in [0, 1)");
  const std::size_t n = g.num_nodes();
  const auto components = weak_components(g);
  const std::size_t total = std::max(coarse_size_bound(n, r), components.size());
  if (r == 0.0 || n <= total) {
    CoarseningResult result = coarsen_identity(g);
    result.map = CoarseningMap::identity(g.nodes(), CoarseningMethod::kKron, r);
    return result;
  }

  const Eigen::MatrixXd W = symmetrized_adjacency(g);
  const std::vector<std::size_t> targets = allocate_targets(components, total);
  std::vector<std::size_t> labels(n, kNone);
  struct Coupling {
    std::size_t a, b;  // original node indices of the two kept representatives
    double weight;
  };
  std::vector<Coupling> couplings;
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& comp = components[c];
    std::vector<NodeId> ids;
    for (std::size_t i : comp) ids.push_back(g.nodes()[i]);
    const KronComponent kc = kron_component(laplacian(component_adjacency(W, comp)), ids, targets[c]);
    for (std::size_t a = 0; a < comp.size(); ++a) labels[comp[a]] = comp[kc.kept[kc.labels[a]]];
    const double tol = 1e-12 * std::max(1.0, kc.reduced.cwiseAbs().maxCoeff());
    for (std::size_t p = 0; p < kc.kept.size(); ++p) {
      for (std::size_t q = p + 1; q < kc.kept.size(); ++q) {
        const double w = -kc.reduced(ix(p), ix(q));
        if (w > tol) couplings.push_back({comp[kc.kept[p]], comp[kc.kept[q]], w});
      }
    }
  }

  CoarseningMap map(CoarseningMethod::kKron, r, g.nodes(), labels);
  const std::set<Edge> original = inter_block_edges(g, map);
  std::set<Edge> edges;
  for (const Coupling& c : couplings) {
    auto s = static_cast<NodeId>(map.supernode_of(g.nodes()[c.a]));
    auto t = static_cast<NodeId>(map.supernode_of(g.nodes()[c.b]));
    if (s > t) std::swap(s, t);
    map.kron_edges.push_back({s, t, c.weight});
    const bool forward = original.count({s, t}) > 0;
    const bool backward = original.count({t, s}) > 0;
    if (forward || !backward) edges.insert({s, t});
    if (backward) edges.insert({t, s});
  }
  std::sort(map.kron_edges.begin(), map.kron_edges.end(),
            [](const WeightedEdge& x, const WeightedEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });

  SampleGraph coarse(g.id(), Level::kCoarseCfg, g.label(), supernode_ids(map.num_supernodes()),
                     concatenated_payload(g, map), std::vector<Edge>(edges.begin(), edges.end()));
  return {std::move(coarse), std::move(map)};
}

CoarseningResult coarsen(const SampleGraph& g, CoarseningMethod method, double r) {
  switch (method) {
    case CoarseningMethod::kIdentity:
      return coarsen_identity(g);
    case CoarseningMethod::kKron:
      return coarsen_kron(g, r);
    case CoarseningMethod::kVariationEdges:
      return coarsen_variation_edges(g, r);
  }
  return coarsen_identity(g);
}

SampleGraph embed_supernodes(const SampleGraph& coarse, const CoarseningMap& map, const SampleGraph& embedded_cfg) {
  if (!embedded_cfg.has_features()) throw std::invalid_argument("embed_supernodes needs CFG node features");
  if (coarse.num_nodes() != map.num_supernodes()) {
    throw std::invalid_argument("sample " + coarse.id() + ": coarse graph and map disagree on supernode count");
  }
  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(ix(coarse.num_nodes()), embedded_cfg.features().cols());
  for (std::size_t s = 0; s < map.num_supernodes(); ++s) {
    const auto row = coarse.index_of(static_cast<NodeId>(s));
    if (!row) throw std::invalid_argument("sample " + coarse.id() + ": missing supernode " + std::to_string(s));
    for (NodeId n : map.block(s)) {
      const auto idx = embedded_cfg.index_of(n);
      if (!idx) {
        throw std::invalid_argument("sample " + coarse.id() + ": block " + std::to_string(s) +
                                    " references unknown node " + std::to_string(n));
      }
      features.row(ix(*row)) += embedded_cfg.features().row(ix(*idx));
    }
  }
  return coarse.with_features(std::move(features));
}

std::vector<NodeId> backtrack_nodes(const CoarseningMap& map, std::span<const NodeId> supernodes) {
  std::vector<NodeId> out;
  for (NodeId s : supernodes) {
    const auto& b = map.block(s);
    out.insert(out.end(), b.begin(), b.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace metacoarse
