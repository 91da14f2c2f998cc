#include "metacoarse/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "metacoarse/hash.hpp"

namespace metacoarse {

namespace {

using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Position of entry (r, c) in the value array of a compressed row-major matrix.
Eigen::Index entry_index(const SparseRow& m, Eigen::Index r, Eigen::Index c) {
  const auto* outer = m.outerIndexPtr();
  const auto* inner = m.innerIndexPtr();
  const auto* begin = inner + outer[r];
  const auto* end = inner + outer[r + 1];
  const auto* it = std::lower_bound(begin, end, static_cast<int>(c));
  if (it == end || *it != c) throw std::logic_error("missing structural entry in normalized adjacency");
  return static_cast<Eigen::Index>(it - inner);
}

}  // namespace

GcnModel::GcnModel(std::size_t input_dim, std::size_t hidden_dim, double dropout)
    : input_dim_(input_dim), hidden_dim_(hidden_dim), dropout_(dropout) {
  if (input_dim == 0 || hidden_dim == 0) throw std::invalid_argument("GCN dimensions must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  const std::size_t h = hidden_dim;
  weights_[0] = Eigen::MatrixXd::Zero(ix(input_dim), ix(h));
  weights_[1] = Eigen::MatrixXd::Zero(ix(h), ix(h));
  weights_[2] = Eigen::MatrixXd::Zero(ix(h), ix(h));
  weights_[3] = Eigen::MatrixXd::Zero(ix(h), ix(kNumClasses));
  for (std::size_t t = 0; t < kNumTensors; ++t) biases_[t] = Eigen::VectorXd::Zero(weights_[t].cols());
}

void GcnModel::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < kNumTensors; ++t) {
    Eigen::MatrixXd& w = weights_[t];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    biases_[t].setZero();
  }
}

std::size_t GcnModel::num_parameters() const {
  std::size_t total = 0;
  for (std::size_t t = 0; t < kNumTensors; ++t) total += static_cast<std::size_t>(weights_[t].size() + biases_[t].size());
  return total;
}

std::vector<double> GcnModel::flatten() const {
  std::vector<double> out;
  out.reserve(num_parameters());
  for (std::size_t t = 0; t < kNumTensors; ++t) {
    const Eigen::MatrixXd& w = weights_[t];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out.push_back(w(r, c));
    }
    for (Eigen::Index i = 0; i < biases_[t].size(); ++i) out.push_back(biases_[t][i]);
  }
  return out;
}

void GcnModel::unflatten(std::span<const double> values) {
  if (values.size() != num_parameters()) {
    throw std::invalid_argument("expected " + std::to_string(num_parameters()) + " parameters, got " +
                                std::to_string(values.size()));
  }
  std::size_t k = 0;
  for (std::size_t t = 0; t < kNumTensors; ++t) {
    Eigen::MatrixXd& w = weights_[t];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = values[k++];
    }
    for (Eigen::Index i = 0; i < biases_[t].size(); ++i) biases_[t][i] = values[k++];
  }
}

bool GcnModel::all_finite() const {
  for (std::size_t t = 0; t < kNumTensors; ++t) {
    if (!weights_[t].allFinite() || !biases_[t].allFinite()) return false;
  }
  return true;
}

std::string GcnModel::parameter_hash() const {
  Fnv1a h;
  h.u64(input_dim_).u64(hidden_dim_).f64(dropout_);
  const std::vector<double> flat = flatten();
  h.f64s(flat);
  return h.hex();
}

GraphBatch make_batch(std::span<const SampleGraph* const> graphs) {
  if (graphs.empty()) throw std::invalid_argument("cannot batch zero graphs");
  GraphBatch batch;
  const std::size_t width = graphs.front()->feature_width();
  batch.node_offsets.push_back(0);
  batch.edge_offsets.push_back(0);
  std::vector<Eigen::Triplet<double>> triplets;
  for (const SampleGraph* g : graphs) {
    if (!g->has_features()) throw std::invalid_argument("sample " + g->id() + " has no node features");
    if (g->feature_width() != width) {
      throw std::invalid_argument("sample " + g->id() + " has feature width " + std::to_string(g->feature_width()) +
                                  ", batch expects " + std::to_string(width));
    }
    if (g->num_nodes() == 0) throw std::invalid_argument("sample " + g->id() + " has no nodes");
    const auto base = static_cast<std::uint32_t>(batch.node_offsets.back());
    const Eigen::MatrixXd& x = g->features();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (x(r, c) != 0.0) triplets.emplace_back(static_cast<int>(base + r), static_cast<int>(c), x(r, c));
      }
    }
    for (auto [s, d] : g->edge_indices()) batch.edges.emplace_back(base + s, base + d);
    batch.labels.push_back(to_int(g->label()));
    batch.node_offsets.push_back(batch.node_offsets.back() + g->num_nodes());
    batch.edge_offsets.push_back(batch.edges.size());
  }
  batch.features.resize(ix(batch.num_nodes()), ix(width));
  batch.features.setFromTriplets(triplets.begin(), triplets.end());
  return batch;
}

GraphBatch make_batch(const SampleGraph& g) {
  const SampleGraph* one[] = {&g};
  return make_batch(std::span<const SampleGraph* const>(one));
}

ForwardResult gcn_forward(const GcnModel& model, const GraphBatch& batch, const Eigen::VectorXd& edge_mask,
                          std::mt19937_64* rng) {
  if (static_cast<std::size_t>(batch.features.cols()) != model.input_dim()) {
    throw std::invalid_argument("feature width " + std::to_string(batch.features.cols()) +
                                " does not match model input " + std::to_string(model.input_dim()));
  }
  if (static_cast<std::size_t>(edge_mask.size()) != batch.num_edges()) {
    throw std::invalid_argument("edge mask has " + std::to_string(edge_mask.size()) + " entries for " +
                                std::to_string(batch.num_edges()) + " edges");
  }
  const std::size_t n = batch.num_nodes();
  ForwardResult result;
  ForwardCache& cache = result.cache;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n + 2 * batch.num_edges());
  for (std::size_t i = 0; i < n; ++i) triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  for (std::size_t e = 0; e < batch.num_edges(); ++e) {
    const auto [u, v] = batch.edges[e];
    triplets.emplace_back(static_cast<int>(u), static_cast<int>(v), edge_mask[ix(e)]);
    if (u != v) triplets.emplace_back(static_cast<int>(v), static_cast<int>(u), edge_mask[ix(e)]);
  }
  cache.a_hat.resize(ix(n), ix(n));
  cache.a_hat.setFromTriplets(triplets.begin(), triplets.end());
  cache.degree = cache.a_hat * Eigen::VectorXd::Ones(ix(n));
  for (Eigen::Index r = 0; r < cache.a_hat.outerSize(); ++r) {
    for (SparseRow::InnerIterator it(cache.a_hat, r); it; ++it) {
      it.valueRef() /= std::sqrt(cache.degree[r] * cache.degree[it.col()]);
    }
  }

  const auto& w = model.weights();
  const auto& b = model.biases();
  Eigen::MatrixXd h;
  for (std::size_t l = 0; l < kNumGcnLayers; ++l) {
    if (l == 0) {
      cache.projected[l] = batch.features * w[l];
    } else {
      cache.inputs[l] = std::move(h);
      cache.projected[l] = cache.inputs[l] * w[l];
    }
    cache.pre[l] = cache.a_hat * cache.projected[l];
    cache.pre[l].rowwise() += b[l].transpose();
    h = cache.pre[l].cwiseMax(0.0);
    if (rng != nullptr && l + 1 < kNumGcnLayers && model.dropout() > 0.0) {
      const double keep = 1.0 - model.dropout();
      std::bernoulli_distribution coin(keep);
      Eigen::MatrixXd mask(h.rows(), h.cols());
      for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        for (Eigen::Index c = 0; c < mask.cols(); ++c) mask(r, c) = coin(*rng) ? 1.0 / keep : 0.0;
      }
      h = h.cwiseProduct(mask);
      cache.dropout_masks[l] = std::move(mask);
    }
  }

  cache.readout.resize(ix(batch.num_graphs()), h.cols());
  for (std::size_t g = 0; g < batch.num_graphs(); ++g) {
    const auto first = ix(batch.node_offsets[g]);
    const auto count = ix(batch.node_offsets[g + 1] - batch.node_offsets[g]);
    cache.readout.row(ix(g)) = h.middleRows(first, count).colwise().mean();
  }
  result.logits = cache.readout * w[3];
  result.logits.rowwise() += b[3].transpose();
  return result;
}

Gradients gcn_backward(const GcnModel& model, const GraphBatch& batch, const Eigen::VectorXd& edge_mask,
                       const ForwardResult& forward, const Eigen::MatrixXd& dlogits, bool mask_gradient) {
  const ForwardCache& cache = forward.cache;
  const auto& w = model.weights();
  const std::size_t n = batch.num_nodes();
  Gradients grads;

  grads.weights[3] = cache.readout.transpose() * dlogits;
  grads.biases[3] = dlogits.colwise().sum().transpose();
  const Eigen::MatrixXd dreadout = dlogits * w[3].transpose();
  Eigen::MatrixXd dh(ix(n), dreadout.cols());
  for (std::size_t g = 0; g < batch.num_graphs(); ++g) {
    const auto first = ix(batch.node_offsets[g]);
    const auto count = ix(batch.node_offsets[g + 1] - batch.node_offsets[g]);
    dh.middleRows(first, count) = dreadout.row(ix(g)).replicate(count, 1) / static_cast<double>(count);
  }

  // dL/dA_hat at the structural entries, aligned with a_hat's value array.
  const SparseRow& a_hat = cache.a_hat;
  Eigen::VectorXd s_entries;
  if (mask_gradient) s_entries = Eigen::VectorXd::Zero(a_hat.nonZeros());

  for (std::size_t step = 0; step < kNumGcnLayers; ++step) {
    const std::size_t l = kNumGcnLayers - 1 - step;
    if (cache.dropout_masks[l].size() > 0) dh = dh.cwiseProduct(cache.dropout_masks[l]);
    const Eigen::MatrixXd dz = dh.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    grads.biases[l] = dz.colwise().sum().transpose();
    const Eigen::MatrixXd dp = a_hat.transpose() * dz;
    if (l == 0) {
      grads.weights[l] = batch.features.transpose() * dp;
    } else {
      grads.weights[l] = cache.inputs[l].transpose() * dp;
      dh = dp * w[l].transpose();
    }
    if (mask_gradient) {
      const Eigen::MatrixXd& p = cache.projected[l];
      Eigen::Index k = 0;
      for (Eigen::Index r = 0; r < a_hat.outerSize(); ++r) {
        for (SparseRow::InnerIterator it(a_hat, r); it; ++it, ++k) s_entries[k] += dz.row(r).dot(p.row(it.col()));
      }
    }
  }

  if (mask_gradient) {
    const Eigen::VectorXd& d = cache.degree;
    // dL/dd_i = -1/(2 d_i) * sum_j (S_ij A_ij + S_ji A_ji)
    Eigen::VectorXd dd = Eigen::VectorXd::Zero(ix(n));
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < a_hat.outerSize(); ++r) {
      for (SparseRow::InnerIterator it(a_hat, r); it; ++it, ++k) {
        const double contrib = s_entries[k] * it.value();
        dd[r] += contrib;
        dd[it.col()] += contrib;
      }
    }
    for (Eigen::Index i = 0; i < dd.size(); ++i) dd[i] *= -0.5 / d[i];

    auto entry_grad = [&](Eigen::Index i, Eigen::Index j) {
      return s_entries[entry_index(a_hat, i, j)] / std::sqrt(d[i] * d[j]) + dd[i];
    };
    grads.edge_mask = Eigen::VectorXd::Zero(edge_mask.size());
    for (std::size_t e = 0; e < batch.num_edges(); ++e) {
      const auto u = static_cast<Eigen::Index>(batch.edges[e].first);
      const auto v = static_cast<Eigen::Index>(batch.edges[e].second);
      grads.edge_mask[ix(e)] = u == v ? entry_grad(u, u) : entry_grad(u, v) + entry_grad(v, u);
    }
  }
  return grads;
}

double cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> labels, Eigen::MatrixXd* dlogits) {
  const auto batch = logits.rows();
  if (static_cast<std::size_t>(batch) != labels.size() || batch == 0) {
    throw std::invalid_argument("cross_entropy: logits and labels disagree in size");
  }
  double loss = 0.0;
  if (dlogits != nullptr) dlogits->resize(batch, logits.cols());
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double peak = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - peak;
    const double log_sum = std::log(shifted.array().exp().sum());
    const int y = labels[static_cast<std::size_t>(i)];
    loss -= shifted[y] - log_sum;
    if (dlogits != nullptr) {
      dlogits->row(i) = (shifted.array() - log_sum).exp().matrix();
      (*dlogits)(i, y) -= 1.0;
    }
  }
  if (dlogits != nullptr) *dlogits /= static_cast<double>(batch);
  return loss / static_cast<double>(batch);
}

Eigen::Vector2d graph_logits(const GcnModel& model, const SampleGraph& g) {
  return graph_logits(model, g, Eigen::VectorXd::Ones(ix(g.num_edges())));
}

Eigen::Vector2d graph_logits(const GcnModel& model, const SampleGraph& g, const Eigen::VectorXd& edge_mask) {
  const GraphBatch batch = make_batch(g);
  return gcn_forward(model, batch, edge_mask).logits.row(0).transpose();
}

Label argmax_label(const Eigen::Vector2d& logits) {
  return logits[1] > logits[0] ? Label::kMalicious : Label::kBenign;
}

}  // namespace metacoarse
