#ifndef METACOARSE_TESTS_FIXTURES_HPP_
#define METACOARSE_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "metacoarse/encode.hpp"
#include "metacoarse/gcn.hpp"
#include "metacoarse/synthetic.hpp"
#include "support/generators.hpp"

namespace metacoarse::testing {

struct FeaturedCorpus {
  std::vector<SampleGraph> raw;
  std::vector<SampleGraph> featured;
  Vocabulary vocab;
};

// Planted-cycle corpus embedded at CFG level with a vocabulary built on the
// first `train_count` samples.
inline FeaturedCorpus planted_corpus(std::size_t n, std::uint64_t seed, std::size_t train_count) {
  FeaturedCorpus c;
  c.raw = generate_synthetic(n, SyntheticSpec::planted_cycle(), seed);
  c.vocab = Vocabulary::build(std::span<const SampleGraph>(c.raw.data(), train_count));
  for (const SampleGraph& g : c.raw) c.featured.push_back(embed_cfg_nodes(g, c.vocab));
  return c;
}

// Small random featured graph for gradient checks.
inline SampleGraph random_featured(std::mt19937_64& rng, std::size_t max_nodes, std::size_t width,
                                   bool self_loops = true) {
  CfgShape shape;
  shape.min_nodes = 2;
  shape.max_nodes = max_nodes;
  shape.edge_probability = 0.2;
  shape.self_loops = self_loops;
  const SampleGraph g = random_cfg(rng, shape, "f", coin(rng, 0.5) ? Label::kMalicious : Label::kBenign);
  return g.with_features(random_features(rng, g.num_nodes(), width));
}

inline GcnModel random_model(std::mt19937_64& rng, std::size_t input, std::size_t hidden) {
  GcnModel m(input, hidden, 0.5);
  m.initialize(rng());
  // Non-zero biases so every parameter carries gradient.
  std::normal_distribution<double> noise(0.0, 0.1);
  for (auto& b : m.biases()) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = noise(rng);
  }
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("metacoarse_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace metacoarse::testing

#endif  // METACOARSE_TESTS_FIXTURES_HPP_
