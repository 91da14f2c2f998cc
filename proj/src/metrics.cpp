#include "metacoarse/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace metacoarse {

namespace {

constexpr double kBinaryTolerance = 1e-12;

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  if (den == 0) {
    undefined = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp, m.undefined);
  m.recall = ratio(tp, tp + fn, m.undefined);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.undefined = true;
  }
  return m;
}

bool non_binary(double x) { return std::abs(x * (1.0 - x)) > kBinaryTolerance; }

std::optional<FidelityScores> fidelity_of(std::span<const SampleOutcome> outcomes, std::optional<int> label) {
  std::vector<bool> removed, kept;
  for (const SampleOutcome& o : outcomes) {
    if (o.prediction != o.label) continue;
    if (label && o.label != *label) continue;
    removed.push_back(o.removed_matches);
    kept.push_back(o.kept_matches);
  }
  if (removed.empty()) return std::nullopt;
  return fidelity_scores(removed, kept);
}

nlohmann::ordered_json class_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"undefined", m.undefined}};
}

nlohmann::ordered_json fid_json(const std::optional<FidelityScores>& f) {
  if (!f) return nullptr;
  return {{"fid_plus", f->fid_plus},
          {"fid_minus", f->fid_minus},
          {"samples", f->samples},
          {"charact_per_sample", f->charact_per_sample}};
}

nlohmann::ordered_json level_json(const LevelEvaluation& e) {
  nlohmann::ordered_json out;
  out["level"] = std::string(to_string(e.level));
  const ConfusionCounts& c = e.inference.counts;
  out["counts"] = {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}};
  out["accuracy"] = e.inference.accuracy;
  out["benign"] = class_json(e.inference.benign);
  out["malicious"] = class_json(e.inference.malicious);
  out["fidelity"] = {{"all", fid_json(e.fid_all)},
                     {"benign", fid_json(e.fid_benign)},
                     {"malicious", fid_json(e.fid_malicious)}};
  out["charact"] = {{"all", e.charact_all}, {"benign", e.charact_benign}, {"malicious", e.charact_malicious}};
  out["beta"] = e.beta;
  return out;
}

}  // namespace

ConfusionCounts confusion_counts(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("predictions and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i], y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) throw std::invalid_argument("labels must be 0 or 1");
    if (y == 1) {
      p == 1 ? ++c.tp : ++c.fn;
    } else {
      p == 1 ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

InferenceMetrics inference_metrics(const ConfusionCounts& c) {
  InferenceMetrics m;
  m.counts = c;
  bool undefined = false;
  m.accuracy = ratio(c.tp + c.tn, c.total(), undefined);
  m.malicious = class_metrics(c.tp, c.fp, c.fn);
  m.benign = class_metrics(c.tn, c.fn, c.fp);
  return m;
}

InferenceMetrics inference_metrics(std::span<const int> predictions, std::span<const int> labels) {
  return inference_metrics(confusion_counts(predictions, labels));
}

FidelityScores fidelity_scores(const std::vector<bool>& removed_matches, const std::vector<bool>& kept_matches) {
  if (removed_matches.empty()) throw std::invalid_argument("fidelity needs at least one sample");
  if (removed_matches.size() != kept_matches.size()) throw std::invalid_argument("fidelity inputs differ in length");
  const std::size_t n = removed_matches.size();
  std::size_t removed = 0, kept = 0;
  double per_sample = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    removed += removed_matches[i] ? 1 : 0;
    kept += kept_matches[i] ? 1 : 0;
    per_sample += characterization(removed_matches[i] ? 0.0 : 1.0, kept_matches[i] ? 0.0 : 1.0);
  }
  FidelityScores f;
  f.samples = n;
  f.fid_plus = 1.0 - static_cast<double>(removed) / static_cast<double>(n);
  f.fid_minus = 1.0 - static_cast<double>(kept) / static_cast<double>(n);
  f.charact_per_sample = per_sample / static_cast<double>(n);
  return f;
}

double characterization(double fid_plus, double fid_minus, double w_plus, double w_minus) {
  if (fid_plus <= 0.0 || fid_minus >= 1.0) return 0.0;
  return (w_plus + w_minus) / (w_plus / fid_plus + w_minus / (1.0 - fid_minus));
}

double characterization(const FidelityScores& fid, double w_plus, double w_minus) {
  return characterization(fid.fid_plus, fid.fid_minus, w_plus, w_minus);
}

double lambda_score(double charact_upper, double charact_lower) { return charact_upper - charact_lower; }

double beta_score(std::span<const Eigen::VectorXd> vectors) {
  if (vectors.empty()) throw std::invalid_argument("beta needs at least one vector");
  std::size_t flagged = 0;
  for (const Eigen::VectorXd& v : vectors) {
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (non_binary(v[j])) {
        ++flagged;
        break;
      }
    }
  }
  return static_cast<double>(flagged) / static_cast<double>(vectors.size());
}

double beta_score(std::span<const SampleGraph> featured_samples) {
  std::vector<Eigen::VectorXd> vectors;
  vectors.reserve(featured_samples.size());
  for (const SampleGraph& g : featured_samples) {
    if (!g.has_features()) throw std::invalid_argument("sample " + g.id() + " has no features");
    vectors.emplace_back(g.features().reshaped());
  }
  return beta_score(std::span<const Eigen::VectorXd>(vectors));
}

LevelEvaluation evaluate_level(Level level, std::span<const SampleOutcome> outcomes, double beta) {
  LevelEvaluation e;
  e.level = level;
  std::vector<int> preds, labels;
  for (const SampleOutcome& o : outcomes) {
    preds.push_back(o.prediction);
    labels.push_back(o.label);
  }
  e.inference = inference_metrics(preds, labels);
  e.fid_all = fidelity_of(outcomes, std::nullopt);
  e.fid_benign = fidelity_of(outcomes, 0);
  e.fid_malicious = fidelity_of(outcomes, 1);
  e.charact_all = e.fid_all ? characterization(*e.fid_all) : 0.0;
  e.charact_benign = e.fid_benign ? characterization(*e.fid_benign) : 0.0;
  e.charact_malicious = e.fid_malicious ? characterization(*e.fid_malicious) : 0.0;
  e.beta = beta;
  return e;
}

MetricsReport aggregate_report(const std::optional<LevelEvaluation>& upper, const std::optional<LevelEvaluation>& lower) {
  if (!upper) throw std::invalid_argument("metrics report is missing the (C-)CFG level");
  if (!lower) throw std::invalid_argument("metrics report is missing the B-AFG level");
  MetricsReport r;
  r.upper = *upper;
  r.lower = *lower;
  r.average_accuracy = (upper->inference.accuracy + lower->inference.accuracy) / 2.0;
  r.lambda_all = lambda_score(upper->charact_all, lower->charact_all);
  r.lambda_benign = lambda_score(upper->charact_benign, lower->charact_benign);
  r.lambda_malicious = lambda_score(upper->charact_malicious, lower->charact_malicious);
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json out;
  out["levels"] = {level_json(upper), level_json(lower)};
  out["average_accuracy"] = average_accuracy;
  out["lambda"] = {{"all", lambda_all}, {"benign", lambda_benign}, {"malicious", lambda_malicious}};
  return out.dump(2);
}

}  // namespace metacoarse
