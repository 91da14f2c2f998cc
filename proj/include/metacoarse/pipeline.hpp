#ifndef METACOARSE_PIPELINE_HPP_
#define METACOARSE_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "metacoarse/coarsen.hpp"
#include "metacoarse/explain.hpp"
#include "metacoarse/metrics.hpp"
#include "metacoarse/train.hpp"

namespace metacoarse {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir;
  CoarseningMethod method = CoarseningMethod::kIdentity;
  double ratio = 0.0;
  double epsilon = 0.10;
  SelectionMethod tau = SelectionMethod::kTes;
  std::size_t ig_steps = 50;
  TrainConfig train;  // its seed is derived from `seed` per level
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  bool dedup = true;

  // Throws std::invalid_argument; identity coarsening requires r = 0 and
  // r = 0 requires identity coarsening.
  void validate() const;
  // Hash over every field except output_dir.
  std::string hash() const;
  std::string to_json() const;
  // Missing keys keep their defaults.
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
};

class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string phase, std::string sample_id, const std::string& detail);
  const std::string& phase() const { return phase_; }
  const std::string& sample_id() const { return sample_id_; }

 private:
  std::string phase_;
  std::string sample_id_;
};

struct PhaseRecord {
  std::string name;
  std::vector<std::string> artifacts;  // paths relative to the output directory
  double seconds = 0.0;
};

struct RunManifest {
  std::string version = kVersion;
  std::string config_hash;
  std::vector<PhaseRecord> phases;
  std::map<std::string, std::string> artifact_hashes;  // relative path -> content hash

  std::string to_json() const;
};

struct LevelResults {
  Level level = Level::kCfg;
  double beta = 0.0;
  std::vector<SampleOutcome> outcomes;  // test samples in id order
};

struct RunOutcome {
  RunManifest manifest;
  MetricsReport report;
  LevelResults upper;
  LevelResults lower;
  std::map<std::string, SampleGraph> bafgs;  // every split sample, unfeatured
};

// Runs every phase and writes all artifacts into config.output_dir. Failures
// are rethrown as PipelineError naming the phase and the sample.
RunOutcome run_pipeline(const RunConfig& config);

// Recomputes the metrics report from a run directory's level results.
MetricsReport report_from_run(const std::filesystem::path& run_dir);

// Sparsity curve for the correctly predicted test samples of one level.
std::vector<CurvePoint> curves_from_run(const std::filesystem::path& run_dir, bool upper_level,
                                        const std::vector<double>& epsilon_grid);
std::string curve_table(const std::vector<CurvePoint>& curve);

struct SweepRow {
  CoarseningMethod method = CoarseningMethod::kIdentity;
  double ratio = 0.0;
  std::filesystem::path output_dir;
  MetricsReport report;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t trained_models = 0;

  // Tab-separated, one line per (method, r, level).
  std::string inference_table() const;
  std::string explainability_table() const;
};

// Baseline followed by every method x ratio, each in its own subdirectory.
std::vector<RunConfig> sweep_grid(const RunConfig& base, const std::vector<CoarseningMethod>& methods,
                                  const std::vector<double>& ratios);

// Throws std::invalid_argument on an empty list or configs that differ in
// input, seed or split fractions.
SweepResult sweep(const std::vector<RunConfig>& configs);

}  // namespace metacoarse

#endif  // METACOARSE_PIPELINE_HPP_
