#include "metacoarse/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "metacoarse/hash.hpp"
#include "metacoarse/log.hpp"

namespace metacoarse {

namespace {

constexpr int kCheckpointVersion = 1;

std::vector<const SampleGraph*> pointers(std::span<const SampleGraph> samples) {
  std::vector<const SampleGraph*> out;
  out.reserve(samples.size());
  for (const SampleGraph& g : samples) out.push_back(&g);
  return out;
}

struct AdamState {
  std::array<Eigen::MatrixXd, GcnModel::kNumTensors> m_w, v_w;
  std::array<Eigen::VectorXd, GcnModel::kNumTensors> m_b, v_b;
  std::size_t step = 0;

  explicit AdamState(const GcnModel& model) {
    for (std::size_t t = 0; t < GcnModel::kNumTensors; ++t) {
      m_w[t] = v_w[t] = Eigen::MatrixXd::Zero(model.weights()[t].rows(), model.weights()[t].cols());
      m_b[t] = v_b[t] = Eigen::VectorXd::Zero(model.biases()[t].size());
    }
  }
};

template <typename Param, typename Grad, typename Moment>
void adam_update(Param& p, const Grad& g, Moment& m, Moment& v, const TrainConfig& c, double bias1, double bias2) {
  m = c.adam_beta1 * m + (1.0 - c.adam_beta1) * g;
  v = c.adam_beta2 * v + (1.0 - c.adam_beta2) * g.cwiseProduct(g);
  const double step = c.learning_rate / bias1;
  p.array() -= step * m.array() / ((v.array() / bias2).sqrt() + c.adam_epsilon);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be >= 0");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (hidden_dim == 0) throw std::invalid_argument("hidden dimension must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
}

std::string TrainConfig::hash() const {
  Fnv1a h;
  h.f64(learning_rate).u64(epochs).u64(batch_size).u64(hidden_dim).f64(dropout);
  h.f64(adam_beta1).f64(adam_beta2).f64(adam_epsilon).u64(seed);
  return h.hex();
}

std::string TrainConfig::to_json() const {
  nlohmann::ordered_json out;
  out["learning_rate"] = learning_rate;
  out["epochs"] = epochs;
  out["batch_size"] = batch_size;
  out["hidden_dim"] = hidden_dim;
  out["dropout"] = dropout;
  out["adam_beta1"] = adam_beta1;
  out["adam_beta2"] = adam_beta2;
  out["adam_epsilon"] = adam_epsilon;
  out["seed"] = seed;
  return out.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  TrainConfig c;
  c.learning_rate = in.value("learning_rate", c.learning_rate);
  c.epochs = in.value("epochs", c.epochs);
  c.batch_size = in.value("batch_size", c.batch_size);
  c.hidden_dim = in.value("hidden_dim", c.hidden_dim);
  c.dropout = in.value("dropout", c.dropout);
  c.adam_beta1 = in.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = in.value("adam_beta2", c.adam_beta2);
  c.adam_epsilon = in.value("adam_epsilon", c.adam_epsilon);
  c.seed = in.value("seed", c.seed);
  c.validate();
  return c;
}

std::string Checkpoint::to_json() const {
  nlohmann::ordered_json out;
  out["version"] = kCheckpointVersion;
  out["input_dim"] = model.input_dim();
  out["hidden_dim"] = model.hidden_dim();
  out["dropout"] = model.dropout();
  out["config"] = nlohmann::ordered_json::parse(config.to_json());
  out["config_hash"] = config.hash();
  out["parameter_hash"] = model.parameter_hash();
  out["epoch"] = epoch;
  out["val_loss"] = val_loss;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < GcnModel::kNumTensors; ++t) {
    const Eigen::MatrixXd& w = model.weights()[t];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    const Eigen::VectorXd& b = model.biases()[t];
    tensors.push_back({{"rows", w.rows()},
                       {"cols", w.cols()},
                       {"weights", flat},
                       {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  out["tensors"] = std::move(tensors);
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const EpochRecord& r : history) hist.push_back({r.epoch, r.train_loss, r.val_loss});
  out["history"] = std::move(hist);
  return out.dump();
}

Checkpoint Checkpoint::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  if (in.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + in.at("version").dump());
  }
  Checkpoint ck;
  ck.config = TrainConfig::from_json(in.at("config").dump());
  if (ck.config.hash() != in.at("config_hash").get<std::string>()) {
    throw std::runtime_error("checkpoint config hash mismatch");
  }
  ck.model = GcnModel(in.at("input_dim").get<std::size_t>(), in.at("hidden_dim").get<std::size_t>(),
                      in.at("dropout").get<double>());
  const auto& tensors = in.at("tensors");
  if (tensors.size() != GcnModel::kNumTensors) throw std::runtime_error("checkpoint has wrong tensor count");
  std::vector<double> flat;
  for (std::size_t t = 0; t < GcnModel::kNumTensors; ++t) {
    const auto& entry = tensors[t];
    const Eigen::MatrixXd& w = ck.model.weights()[t];
    if (entry.at("rows").get<Eigen::Index>() != w.rows() || entry.at("cols").get<Eigen::Index>() != w.cols()) {
      throw std::runtime_error("checkpoint tensor " + std::to_string(t) + " has the wrong shape");
    }
    const auto weights = entry.at("weights").get<std::vector<double>>();
    const auto bias = entry.at("bias").get<std::vector<double>>();
    if (weights.size() != static_cast<std::size_t>(w.size()) ||
        bias.size() != static_cast<std::size_t>(ck.model.biases()[t].size())) {
      throw std::runtime_error("checkpoint tensor " + std::to_string(t) + " has the wrong length");
    }
    flat.insert(flat.end(), weights.begin(), weights.end());
    flat.insert(flat.end(), bias.begin(), bias.end());
  }
  ck.model.unflatten(flat);
  if (ck.model.parameter_hash() != in.at("parameter_hash").get<std::string>()) {
    throw std::runtime_error("checkpoint parameter hash mismatch");
  }
  ck.epoch = in.at("epoch").get<std::size_t>();
  ck.val_loss = in.at("val_loss").get<double>();
  for (const auto& r : in.at("history")) {
    ck.history.push_back({r.at(0).get<std::size_t>(), r.at(1).get<double>(), r.at(2).get<double>()});
  }
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json() << '\n';
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

double evaluate_loss(const GcnModel& model, std::span<const SampleGraph> samples, std::size_t batch_size) {
  if (samples.empty()) throw std::invalid_argument("cannot evaluate loss on an empty set");
  const auto all = pointers(samples);
  double total = 0.0;
  for (std::size_t start = 0; start < all.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, all.size() - start);
    const GraphBatch batch = make_batch(std::span<const SampleGraph* const>(all.data() + start, count));
    const ForwardResult fwd = gcn_forward(model, batch, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(batch.num_edges())));
    total += cross_entropy(fwd.logits, batch.labels, nullptr) * static_cast<double>(count);
  }
  return total / static_cast<double>(all.size());
}

Checkpoint train(std::span<const SampleGraph> train_set, std::span<const SampleGraph> val_set,
                 const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  if (val_set.empty()) throw std::invalid_argument("validation set is empty");
  const std::size_t width = train_set.front().feature_width();
  for (auto set : {train_set, val_set}) {
    for (const SampleGraph& g : set) {
      if (!g.has_features() || g.feature_width() != width) {
        throw std::invalid_argument("sample " + g.id() + " is not featured at width " + std::to_string(width));
      }
    }
  }

  GcnModel model(width, config.hidden_dim, config.dropout);
  model.initialize(config.seed);
  AdamState adam(model);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  Checkpoint best;
  best.config = config;
  best.model = model;
  best.val_loss = std::numeric_limits<double>::infinity();

  std::vector<const SampleGraph*> order = pointers(train_set);
  std::vector<EpochRecord> history;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      const GraphBatch batch = make_batch(std::span<const SampleGraph* const>(order.data() + start, count));
      const Eigen::VectorXd mask = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(batch.num_edges()));
      const ForwardResult fwd = gcn_forward(model, batch, mask, &rng);
      Eigen::MatrixXd dlogits;
      epoch_loss += cross_entropy(fwd.logits, batch.labels, &dlogits) * static_cast<double>(count);
      const Gradients grads = gcn_backward(model, batch, mask, fwd, dlogits, false);

      ++adam.step;
      const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(adam.step));
      const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(adam.step));
      for (std::size_t t = 0; t < GcnModel::kNumTensors; ++t) {
        adam_update(model.weights()[t], grads.weights[t], adam.m_w[t], adam.v_w[t], config, bias1, bias2);
        adam_update(model.biases()[t], grads.biases[t], adam.m_b[t], adam.v_b[t], config, bias1, bias2);
      }
      if (!model.all_finite()) {
        throw std::runtime_error("non-finite parameters after epoch " + std::to_string(epoch) + " step " +
                                 std::to_string(adam.step));
      }
    }
    const double val_loss = evaluate_loss(model, val_set);
    history.push_back({epoch, epoch_loss / static_cast<double>(order.size()), val_loss});
    if (std::isfinite(val_loss) && val_loss < best.val_loss) {
      best.val_loss = val_loss;
      best.epoch = epoch;
      best.model = model;
    }
  }
  if (best.epoch == 0) throw std::runtime_error("validation loss was never finite");
  best.history = std::move(history);
  log_info("trained " + std::to_string(config.epochs) + " epochs, best epoch " + std::to_string(best.epoch));
  return best;
}

Prediction predict(const GcnModel& model, const SampleGraph& g) {
  return predict(model, g, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.num_edges())));
}

Prediction predict(const GcnModel& model, const SampleGraph& g, const Eigen::VectorXd& edge_mask) {
  if (g.feature_width() != model.input_dim()) {
    throw std::invalid_argument("sample " + g.id() + " has feature width " + std::to_string(g.feature_width()) +
                                ", model expects " + std::to_string(model.input_dim()));
  }
  Prediction p;
  p.logits = graph_logits(model, g, edge_mask);
  p.label = argmax_label(p.logits);
  return p;
}

}  // namespace metacoarse
