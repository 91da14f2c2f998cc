#ifndef METACOARSE_ENCODE_HPP_
#define METACOARSE_ENCODE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "metacoarse/graph.hpp"

namespace metacoarse {

// Full category count per instruction feature. Defaults to the standard table
// (sum 1073); kept configurable so other totals can be reproduced.
struct FeatureSpec {
  std::array<std::uint32_t, kNumInstructionFeatures> widths{};

  static FeatureSpec standard();
  std::size_t total() const;
};

// Reduced one-hot vocabulary: per feature, the raw codes observed in training
// (first-observation order) followed by one out-of-vocabulary slot.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Throws std::invalid_argument if a raw code is not below its feature width.
  static Vocabulary build(std::span<const SampleGraph> train_samples,
                          const FeatureSpec& spec = FeatureSpec::standard());

  std::size_t total_width() const { return total_width_; }
  std::size_t block_width(std::size_t feature) const { return codes_[feature].size() + 1; }
  std::size_t offset(std::size_t feature) const { return offsets_[feature]; }
  const std::vector<std::uint32_t>& observed_codes(std::size_t feature) const { return codes_[feature]; }
  const FeatureSpec& spec() const { return spec_; }

  // Position of `raw` inside the feature's block; unseen codes map to the OOV slot.
  std::size_t local_index(std::size_t feature, std::uint32_t raw) const;
  bool is_oov(std::size_t feature, std::uint32_t raw) const;

  // Versioned JSON sidecar: feature name -> ordered observed code list.
  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.spec_.widths == b.spec_.widths && a.codes_ == b.codes_;
  }

 private:
  void finalize();

  FeatureSpec spec_ = FeatureSpec::standard();
  std::array<std::vector<std::uint32_t>, kNumInstructionFeatures> codes_;
  std::array<std::unordered_map<std::uint32_t, std::size_t>, kNumInstructionFeatures> lookup_;
  std::array<std::size_t, kNumInstructionFeatures> offsets_{};
  std::size_t total_width_ = 0;
};

// Column of the single active bit of every feature block.
using SparseOneHot = std::array<std::uint32_t, kNumInstructionFeatures>;

SparseOneHot encode_instruction(const InstructionRecord& instr, const Vocabulary& vocab);
Eigen::VectorXd to_dense(const SparseOneHot& code, const Vocabulary& vocab);

// CFG and C-CFG nodes: sum of their instruction one-hots (width total_width).
// Nodes without instructions get a zero row and a logged warning.
SampleGraph embed_cfg_nodes(const SampleGraph& g, const Vocabulary& vocab);

// B-AFG nodes: the reduced opcode_0 block only (width block_width(opcode_0)).
SampleGraph embed_bafg_nodes(const SampleGraph& g, const Vocabulary& vocab);

}  // namespace metacoarse

#endif  // METACOARSE_ENCODE_HPP_
