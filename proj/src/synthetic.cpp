#include "metacoarse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace metacoarse {

InstructionDistribution InstructionDistribution::standard() {
  InstructionDistribution dist;
  const auto& features = instruction_features();
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
    const std::uint32_t count = std::min<std::uint32_t>(features[f].width, 4);
    for (std::uint32_t c = 0; c < count; ++c) dist.pools[f].push_back(c);
  }
  dist.pools[kOpcode0Feature].clear();
  for (std::uint32_t c = 1; c <= 60; ++c) dist.pools[kOpcode0Feature].push_back(c);
  return dist;
}

Motif Motif::directed_cycle(std::size_t size, std::vector<std::uint32_t> opcode0_codes) {
  Motif m;
  m.size = size;
  for (std::size_t i = 0; i < size; ++i) {
    m.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>((i + 1) % size));
  }
  m.opcode0_codes = std::move(opcode0_codes);
  return m;
}

SyntheticSpec SyntheticSpec::planted_cycle() {
  SyntheticSpec spec;
  spec.classes[1].motif = Motif::directed_cycle(4, {190, 191, 192, 193});
  return spec;
}

bool is_motif_instruction(const InstructionRecord& instr, const Motif& motif) {
  return std::find(motif.opcode0_codes.begin(), motif.opcode0_codes.end(), instr.opcode0()) !=
         motif.opcode0_codes.end();
}

namespace {

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

InstructionRecord draw_instruction(std::mt19937_64& rng, const InstructionDistribution& dist) {
  InstructionRecord instr;
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
    const auto& pool = dist.pools[f];
    instr.codes[f] = pool.empty() ? 0 : pool[uniform_index(rng, 0, pool.size() - 1)];
  }
  return instr;
}

void validate(const SyntheticSpec& spec) {
  if (spec.min_nodes == 0 || spec.min_nodes > spec.max_nodes) throw std::invalid_argument("invalid node range");
  if (spec.min_instructions == 0 || spec.min_instructions > spec.max_instructions) {
    throw std::invalid_argument("invalid instruction range");
  }
  if (!(spec.instruction_continue >= 0.0 && spec.instruction_continue <= 1.0)) {
    throw std::invalid_argument("instruction_continue must lie in [0, 1]");
  }
  if (!(spec.malicious_fraction >= 0.0 && spec.malicious_fraction <= 1.0)) {
    throw std::invalid_argument("malicious_fraction must lie in [0, 1]");
  }
  for (const ClassSpec& cls : spec.classes) {
    if (!cls.motif) continue;
    const Motif& m = *cls.motif;
    if (m.size > spec.min_nodes) {
      throw std::invalid_argument("motif of " + std::to_string(m.size) + " nodes is larger than the smallest backbone (" +
                                  std::to_string(spec.min_nodes) + " nodes)");
    }
    if (m.opcode0_codes.empty() || m.min_instructions == 0 || m.min_instructions > m.max_instructions) {
      throw std::invalid_argument("motif needs opcode codes and a valid instruction range");
    }
    for (auto [a, b] : m.edges) {
      if (a >= m.size || b >= m.size) throw std::invalid_argument("motif edge out of range");
    }
  }
}

SampleGraph generate_one(std::mt19937_64& rng, const SyntheticSpec& spec, Label label, std::string id) {
  const ClassSpec& cls = spec.classes[static_cast<std::size_t>(to_int(label))];
  const std::size_t n = uniform_index(rng, spec.min_nodes, spec.max_nodes);

  std::set<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    std::bernoulli_distribution fallthrough(0.7);
    std::size_t parent = fallthrough(rng) ? i - 1 : uniform_index(rng, 0, i - 1);
    edges.insert({static_cast<NodeId>(parent), static_cast<NodeId>(i)});
  }
  const double p = n > 1 ? spec.extra_out_degree / static_cast<double>(n - 1) : 0.0;
  std::bernoulli_distribution extra(std::min(p, 1.0));
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u != v && extra(rng)) edges.insert({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
  }

  std::vector<NodePayload> payload(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = spec.min_instructions;
    std::size_t hi = spec.max_instructions;
    if (i == 0) {
      lo = std::max<std::size_t>(lo, 2);
      hi = std::max(hi, lo);
    }
    std::bernoulli_distribution grow(spec.instruction_continue);
    std::size_t k = lo;
    while (k < hi && grow(rng)) ++k;
    for (std::size_t j = 0; j < k; ++j) payload[i].push_back(draw_instruction(rng, cls.instructions));
  }

  if (cls.motif) {
    const Motif& m = *cls.motif;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(m.size);
    for (std::size_t local = 0; local < m.size; ++local) {
      NodePayload& instrs = payload[order[local]];
      instrs.clear();
      const std::size_t k = uniform_index(rng, m.min_instructions, m.max_instructions);
      for (std::size_t j = 0; j < k; ++j) {
        InstructionRecord instr = draw_instruction(rng, cls.instructions);
        instr.codes[kOpcode0Feature] = m.opcode0_codes[uniform_index(rng, 0, m.opcode0_codes.size() - 1)];
        instrs.push_back(instr);
      }
    }
    for (auto [a, b] : m.edges) edges.insert({static_cast<NodeId>(order[a]), static_cast<NodeId>(order[b])});
  }

  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  return SampleGraph(std::move(id), Level::kCfg, label, std::move(nodes), std::move(payload),
                     std::vector<Edge>(edges.begin(), edges.end()));
}

}  // namespace

std::vector<SampleGraph> generate_synthetic(std::size_t n_samples, const SyntheticSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  const auto n_malicious =
      static_cast<std::size_t>(std::lround(spec.malicious_fraction * static_cast<double>(n_samples)));
  std::vector<Label> labels(n_samples, Label::kBenign);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(std::min(n_malicious, n_samples)),
            Label::kMalicious);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<SampleGraph> samples;
  samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", i);
    samples.push_back(generate_one(rng, spec, labels[i], id));
  }
  return samples;
}

}  // namespace metacoarse
