#ifndef METACOARSE_SYNTHETIC_HPP_
#define METACOARSE_SYNTHETIC_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "metacoarse/graph.hpp"

namespace metacoarse {

// Candidate raw codes per instruction feature; each code is drawn uniformly.
struct InstructionDistribution {
  std::array<std::vector<std::uint32_t>, kNumInstructionFeatures> pools;

  // Small pools inside every feature's full width. opcode_0 draws from 1..60.
  static InstructionDistribution standard();
};

// A subgraph planted into every sample of a class. Motif instructions take
// their opcode_0 from `opcode0_codes`, which the backbone never uses.
struct Motif {
  std::size_t size = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // local node indices
  std::vector<std::uint32_t> opcode0_codes;
  std::size_t min_instructions = 6;
  std::size_t max_instructions = 8;

  static Motif directed_cycle(std::size_t size, std::vector<std::uint32_t> opcode0_codes);
};

struct ClassSpec {
  std::optional<Motif> motif;
  InstructionDistribution instructions = InstructionDistribution::standard();
};

struct SyntheticSpec {
  std::array<ClassSpec, 2> classes;  // indexed by label
  double malicious_fraction = 0.5;
  std::size_t min_nodes = 10;
  std::size_t max_nodes = 60;
  std::size_t min_instructions = 1;
  std::size_t max_instructions = 8;
  // Backbone block sizes are truncated-geometric from min_instructions: each
  // further instruction is added with this probability. 1 gives max_instructions.
  double instruction_continue = 0.5;
  // Expected number of random edges per node on top of the spanning backbone.
  double extra_out_degree = 0.6;

  // Benign: no motif. Malicious: a 4-node directed cycle with opcode_0 in 190..193.
  static SyntheticSpec planted_cycle();
};

// Random weakly connected CFGs: a random spanning arborescence (mostly
// fall-through edges) plus Erdos-Renyi extra edges, with the class motif
// embedded on randomly chosen nodes. Node 0 always holds at least two
// instructions. Throws std::invalid_argument if a motif does not fit the
// smallest backbone.
std::vector<SampleGraph> generate_synthetic(std::size_t n_samples, const SyntheticSpec& spec,
                                            std::uint64_t seed);

bool is_motif_instruction(const InstructionRecord& instr, const Motif& motif);

}  // namespace metacoarse

#endif  // METACOARSE_SYNTHETIC_HPP_
