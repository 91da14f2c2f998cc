#include "metacoarse/interchange.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include <json.hpp>

#include "metacoarse/log.hpp"

namespace metacoarse {

using nlohmann::json;
using nlohmann::ordered_json;

ParseError::ParseError(std::size_t line, std::string field, const std::string& detail)
    : std::runtime_error("line " + std::to_string(line) + ": field '" + field + "': " + detail),
      line_(line),
      field_(std::move(field)) {}

std::string serialize_sample(const SampleGraph& g) {
  ordered_json out;
  out["id"] = g.id();
  out["label"] = to_int(g.label());
  out["level"] = std::string(to_string(g.level()));
  ordered_json nodes = ordered_json::object();
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    ordered_json instructions = ordered_json::array();
    for (const InstructionRecord& instr : g.payload()[i]) {
      instructions.push_back(instr.codes);
    }
    nodes[std::to_string(g.nodes()[i])] = std::move(instructions);
  }
  out["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.src, e.dst});
  out["edges"] = std::move(edges);
  return out.dump();
}

namespace {

NodeId parse_node_id(std::string_view text, std::size_t line) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() ||
      value > std::numeric_limits<NodeId>::max()) {
    throw ParseError(line, "nodes", "node id '" + std::string(text) + "' is not a non-negative integer");
  }
  return static_cast<NodeId>(value);
}

NodeId parse_endpoint(const json& v, std::size_t line) {
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<NodeId>::max()) {
    throw ParseError(line, "edges", "edge endpoint must be a non-negative integer node id");
  }
  return static_cast<NodeId>(v.get<std::uint64_t>());
}

InstructionRecord parse_instruction(const json& v, std::size_t line, std::string_view node) {
  const std::string where = "instruction of node " + std::string(node);
  if (!v.is_array() || v.size() != kNumInstructionFeatures) {
    throw ParseError(line, "nodes", where + " must be an array of 25 integers");
  }
  InstructionRecord instr;
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
    const json& code = v[f];
    if (!code.is_number_unsigned() || code.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError(line, "nodes",
                       where + ": code for " + std::string(instruction_features()[f].name) +
                           " must be a non-negative integer");
    }
    instr.codes[f] = static_cast<std::uint32_t>(code.get<std::uint64_t>());
  }
  return instr;
}

}  // namespace

SampleGraph parse_sample(std::string_view line_text, std::size_t line) {
  json record;
  try {
    record = json::parse(line_text.begin(), line_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(line, "<record>", std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) throw ParseError(line, "<record>", "record must be a JSON object");

  auto id_it = record.find("id");
  if (id_it == record.end() || !id_it->is_string()) throw ParseError(line, "id", "missing or not a string");
  std::string id = id_it->get<std::string>();

  auto label_it = record.find("label");
  if (label_it == record.end() || !label_it->is_number_integer()) {
    throw ParseError(line, "label", "missing or not an integer");
  }
  auto label = label_from_int(label_it->get<long long>());
  if (!label) throw ParseError(line, "label", "must be 0 or 1");

  Level level = Level::kCfg;
  if (auto level_it = record.find("level"); level_it != record.end()) {
    if (!level_it->is_string()) throw ParseError(line, "level", "must be a string");
    auto parsed = parse_level(level_it->get<std::string>());
    if (!parsed) throw ParseError(line, "level", "unknown level '" + level_it->get<std::string>() + "'");
    level = *parsed;
  }

  auto nodes_it = record.find("nodes");
  if (nodes_it == record.end() || !nodes_it->is_object()) {
    throw ParseError(line, "nodes", "missing or not an object");
  }
  std::vector<NodeId> nodes;
  std::vector<NodePayload> payload;
  for (auto it = nodes_it->begin(); it != nodes_it->end(); ++it) {
    nodes.push_back(parse_node_id(it.key(), line));
    if (!it.value().is_array()) throw ParseError(line, "nodes", "node " + it.key() + " must map to an array");
    NodePayload instructions;
    for (const json& instr : it.value()) instructions.push_back(parse_instruction(instr, line, it.key()));
    payload.push_back(std::move(instructions));
  }

  auto edges_it = record.find("edges");
  if (edges_it == record.end() || !edges_it->is_array()) {
    throw ParseError(line, "edges", "missing or not an array");
  }
  std::vector<Edge> edges;
  for (const json& e : *edges_it) {
    if (!e.is_array() || e.size() != 2) throw ParseError(line, "edges", "each edge must be [src, dst]");
    edges.push_back({parse_endpoint(e[0], line), parse_endpoint(e[1], line)});
  }

  return SampleGraph(std::move(id), level, *label, std::move(nodes), std::move(payload), std::move(edges));
}

namespace {

// Best effort, for rejection reports on records that failed validation.
std::string id_if_present(const std::string& line) {
  const json record = json::parse(line, nullptr, false);
  if (record.is_object() && record.contains("id") && record.at("id").is_string()) return record.at("id").get<std::string>();
  return {};
}

}  // namespace

LoadResult read_samples(std::istream& in) {
  LoadResult result;
  std::string line;
  std::size_t line_number = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      SampleGraph g = parse_sample(line, line_number);
      if (!seen.insert(g.id()).second) {
        result.rejected.push_back({line_number, g.id(), "duplicate sample id"});
        log_warning("line " + std::to_string(line_number) + ": duplicate sample id " + g.id() + " rejected");
        continue;
      }
      result.samples.push_back(std::move(g));
    } catch (const std::invalid_argument& e) {
      result.rejected.push_back({line_number, id_if_present(line), e.what()});
      log_warning("line " + std::to_string(line_number) + ": sample rejected: " + e.what());
    }
  }
  std::sort(result.samples.begin(), result.samples.end(),
            [](const SampleGraph& a, const SampleGraph& b) { return a.id() < b.id(); });
  return result;
}

LoadResult load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_samples(in);
}

void write_samples(std::ostream& out, std::span<const SampleGraph> samples) {
  for (const SampleGraph& g : samples) out << serialize_sample(g) << '\n';
}

void save_samples(const std::filesystem::path& path, std::span<const SampleGraph> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_samples(out, samples);
}

}  // namespace metacoarse
