#ifndef METACOARSE_DATASET_HPP_
#define METACOARSE_DATASET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metacoarse/graph.hpp"

namespace metacoarse {

// Weisfeiler-Lehman signature of a directed graph. Initial node colors are
// (out-degree, in-degree, instruction count); each round mixes in the sorted
// multisets of out- and in-neighbor colors. The signature is the sorted color
// histogram of every round, so it is invariant under node relabeling.
std::vector<std::uint64_t> wl_signature(const SampleGraph& g, int rounds = 3);

// Keeps one sample per WL signature class, the one with the smallest id.
// Output is sorted by id.
std::vector<SampleGraph> dedup_nonisomorphic(std::span<const SampleGraph> samples, int rounds = 3);

struct DatasetSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
  // Indexed by label: [benign, malicious].
  std::array<std::size_t, 2> train_counts{};
  std::array<std::size_t, 2> val_counts{};
  std::array<std::size_t, 2> test_counts{};
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

// Stratified split. Per class, round(train_fraction * n) samples go to the
// pre-validation train pool (clamped so test keeps at least one), then
// round(val_fraction_of_train * pool) of those (at least one) move to
// validation. Throws std::invalid_argument if a class has fewer than two
// samples or a fraction lies outside (0, 1).
DatasetSplit split_dataset(std::span<const SampleGraph> samples, double train_fraction,
                           double val_fraction_of_train, std::uint64_t seed);

}  // namespace metacoarse

#endif  // METACOARSE_DATASET_HPP_
