#ifndef METACOARSE_INTERCHANGE_HPP_
#define METACOARSE_INTERCHANGE_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metacoarse/graph.hpp"

namespace metacoarse {

// Malformed interchange record. what() names the line and the offending field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& detail);

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

// A record that parsed but violated a graph invariant (e.g. a dangling edge).
struct Rejection {
  std::size_t line = 0;
  std::string sample_id;
  std::string reason;
};

struct LoadResult {
  std::vector<SampleGraph> samples;  // sorted by sample id
  std::vector<Rejection> rejected;
};

// One sample as a single JSON object line (no trailing newline). Keys are
// written in the order id, label, level, nodes, edges; nodes ascend by id.
std::string serialize_sample(const SampleGraph& g);

// Parses one line. Throws ParseError for malformed JSON or fields and
// std::invalid_argument for graph invariant violations.
SampleGraph parse_sample(std::string_view line, std::size_t line_number = 1);

// Blank lines are skipped. Malformed records throw ParseError; samples that
// break graph invariants or repeat an earlier id are rejected and logged.
LoadResult read_samples(std::istream& in);
LoadResult load_samples(const std::filesystem::path& path);

void write_samples(std::ostream& out, std::span<const SampleGraph> samples);
void save_samples(const std::filesystem::path& path, std::span<const SampleGraph> samples);

}  // namespace metacoarse

#endif  // METACOARSE_INTERCHANGE_HPP_
