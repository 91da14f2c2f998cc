#ifndef METACOARSE_TRAIN_HPP_
#define METACOARSE_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metacoarse/gcn.hpp"
#include "metacoarse/graph.hpp"

namespace metacoarse {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t epochs = 150;
  std::size_t batch_size = 8;
  std::size_t hidden_dim = 128;
  double dropout = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on non-positive sizes or invalid rates.
  void validate() const;
  std::string hash() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct Checkpoint {
  GcnModel model;
  std::size_t epoch = 0;  // 1-based epoch the parameters were taken from
  double val_loss = 0.0;
  TrainConfig config;
  std::vector<EpochRecord> history;

  std::string to_json() const;
  // Throws std::runtime_error if the stored config or parameter hash does not match.
  static Checkpoint from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

// Adam over mean cross-entropy with seeded shuffling and dropout. Returns the
// parameters of the epoch with the lowest validation loss (earliest on ties).
// Throws std::invalid_argument on empty sets or inconsistent feature widths,
// std::runtime_error if the parameters stop being finite.
Checkpoint train(std::span<const SampleGraph> train_set, std::span<const SampleGraph> val_set,
                 const TrainConfig& config);

// Mean cross-entropy over a set with dropout off.
double evaluate_loss(const GcnModel& model, std::span<const SampleGraph> samples, std::size_t batch_size = 64);

struct Prediction {
  Label label = Label::kBenign;
  Eigen::Vector2d logits = Eigen::Vector2d::Zero();
};

// Inference with an all-ones edge mask. Throws on feature width mismatch.
Prediction predict(const GcnModel& model, const SampleGraph& g);
Prediction predict(const GcnModel& model, const SampleGraph& g, const Eigen::VectorXd& edge_mask);

}  // namespace metacoarse

#endif  // METACOARSE_TRAIN_HPP_
