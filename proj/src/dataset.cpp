#include "metacoarse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "metacoarse/hash.hpp"

namespace metacoarse {

std::vector<std::uint64_t> wl_signature(const SampleGraph& g, int rounds) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<std::uint32_t>> out_nbrs(n), in_nbrs(n);
  for (auto [s, d] : g.edge_indices()) {
    out_nbrs[s].push_back(d);
    in_nbrs[d].push_back(s);
  }

  std::vector<std::uint64_t> colors(n);
  for (std::size_t i = 0; i < n; ++i) {
    colors[i] = Fnv1a().u64(out_nbrs[i].size()).u64(in_nbrs[i].size()).u64(g.payload()[i].size()).digest();
  }

  std::vector<std::uint64_t> signature;
  auto append_histogram = [&](const std::vector<std::uint64_t>& c) {
    std::vector<std::uint64_t> sorted = c;
    std::sort(sorted.begin(), sorted.end());
    signature.push_back(sorted.size());
    signature.insert(signature.end(), sorted.begin(), sorted.end());
  };
  append_histogram(colors);

  std::vector<std::uint64_t> next(n), scratch;
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      Fnv1a h;
      h.u64(colors[i]);
      for (const auto* nbrs : {&out_nbrs[i], &in_nbrs[i]}) {
        scratch.clear();
        for (std::uint32_t j : *nbrs) scratch.push_back(colors[j]);
        std::sort(scratch.begin(), scratch.end());
        h.u64(scratch.size());
        for (std::uint64_t c : scratch) h.u64(c);
      }
      next[i] = h.digest();
    }
    colors.swap(next);
    append_histogram(colors);
  }
  return signature;
}

std::vector<SampleGraph> dedup_nonisomorphic(std::span<const SampleGraph> samples, int rounds) {
  std::vector<const SampleGraph*> ordered;
  ordered.reserve(samples.size());
  for (const SampleGraph& g : samples) ordered.push_back(&g);
  std::sort(ordered.begin(), ordered.end(), [](const SampleGraph* a, const SampleGraph* b) { return a->id() < b->id(); });

  std::map<std::vector<std::uint64_t>, const SampleGraph*> representatives;
  std::vector<SampleGraph> kept;
  for (const SampleGraph* g : ordered) {
    if (representatives.emplace(wl_signature(*g, rounds), g).second) kept.push_back(*g);
  }
  return kept;
}

DatasetSplit split_dataset(std::span<const SampleGraph> samples, double train_fraction,
                           double val_fraction_of_train, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  if (!(val_fraction_of_train > 0.0 && val_fraction_of_train < 1.0)) {
    throw std::invalid_argument("val_fraction_of_train must lie in (0, 1)");
  }

  std::array<std::vector<std::string>, 2> by_class;
  for (const SampleGraph& g : samples) by_class[static_cast<std::size_t>(to_int(g.label()))].push_back(g.id());

  DatasetSplit split;
  split.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < 2; ++c) {
    auto& ids = by_class[c];
    if (ids.size() < 2) {
      throw std::invalid_argument(std::string("class ") + (c == 0 ? "benign" : "malicious") +
                                  " needs at least 2 samples to split, has " + std::to_string(ids.size()));
    }
    std::sort(ids.begin(), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);

    const auto n = static_cast<long>(ids.size());
    long pool = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
    long val = pool >= 2 ? std::clamp(std::lround(val_fraction_of_train * static_cast<double>(pool)), 1L, pool - 1) : 0L;
    long train = pool - val;

    split.train_ids.insert(split.train_ids.end(), ids.begin(), ids.begin() + train);
    split.val_ids.insert(split.val_ids.end(), ids.begin() + train, ids.begin() + pool);
    split.test_ids.insert(split.test_ids.end(), ids.begin() + pool, ids.end());
    split.train_counts[c] = static_cast<std::size_t>(train);
    split.val_counts[c] = static_cast<std::size_t>(val);
    split.test_counts[c] = static_cast<std::size_t>(n - pool);
  }
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.val_ids.begin(), split.val_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  return split;
}

}  // namespace metacoarse
