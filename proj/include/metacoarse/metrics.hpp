#ifndef METACOARSE_METRICS_HPP_
#define METACOARSE_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metacoarse/graph.hpp"

namespace metacoarse {

// Malicious is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool undefined = false;  // some denominator was zero and the value was reported as 0
};

struct InferenceMetrics {
  ConfusionCounts counts;
  double accuracy = 0.0;
  ClassMetrics benign;
  ClassMetrics malicious;
};

// Throws std::invalid_argument on length mismatch or labels outside {0, 1}.
ConfusionCounts confusion_counts(std::span<const int> predictions, std::span<const int> labels);
InferenceMetrics inference_metrics(const ConfusionCounts& counts);
InferenceMetrics inference_metrics(std::span<const int> predictions, std::span<const int> labels);

struct FidelityScores {
  double fid_plus = 0.0;
  double fid_minus = 0.0;
  std::size_t samples = 0;
  // Mean of the per-sample characterization scores, next to the aggregate one.
  double charact_per_sample = 0.0;
};

// fid+ = 1 - mean(removed_matches), fid- = 1 - mean(kept_matches).
// Throws std::invalid_argument on empty input or mismatched lengths.
FidelityScores fidelity_scores(const std::vector<bool>& removed_matches, const std::vector<bool>& kept_matches);

// Weighted harmonic mean of fid+ and 1 - fid-; 0 when fid+ = 0 or fid- = 1.
double characterization(double fid_plus, double fid_minus, double w_plus = 0.5, double w_minus = 0.5);
double characterization(const FidelityScores& fid, double w_plus = 0.5, double w_minus = 0.5);

double lambda_score(double charact_upper, double charact_lower);

// Fraction of vectors with at least one entry outside {0, 1} (tolerance 1e-12).
// Throws std::invalid_argument on empty input.
double beta_score(std::span<const Eigen::VectorXd> vectors);
// Same over node feature matrices, one per sample.
double beta_score(std::span<const SampleGraph> featured_samples);

// Everything needed to evaluate one level, per test sample.
struct SampleOutcome {
  std::string sample_id;
  int label = 0;
  int prediction = 0;
  bool removed_matches = true;
  bool kept_matches = true;
};

struct LevelEvaluation {
  Level level = Level::kCfg;
  InferenceMetrics inference;
  std::optional<FidelityScores> fid_all;
  std::optional<FidelityScores> fid_benign;
  std::optional<FidelityScores> fid_malicious;
  double charact_all = 0.0;
  double charact_benign = 0.0;
  double charact_malicious = 0.0;
  double beta = 0.0;
};

// Fidelity is computed over correctly predicted samples, overall and per class.
LevelEvaluation evaluate_level(Level level, std::span<const SampleOutcome> outcomes, double beta);

struct MetricsReport {
  LevelEvaluation upper;  // (C-)CFG
  LevelEvaluation lower;  // B-AFG
  double average_accuracy = 0.0;
  double lambda_all = 0.0;
  double lambda_benign = 0.0;
  double lambda_malicious = 0.0;

  std::string to_json() const;
};

// Throws std::invalid_argument if either level is missing.
MetricsReport aggregate_report(const std::optional<LevelEvaluation>& upper, const std::optional<LevelEvaluation>& lower);

}  // namespace metacoarse

#endif  // METACOARSE_METRICS_HPP_
