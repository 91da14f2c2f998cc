#include "metacoarse/encode.hpp"

#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "metacoarse/log.hpp"

namespace metacoarse {

namespace {
constexpr int kVocabularyVersion = 1;
}

FeatureSpec FeatureSpec::standard() {
  FeatureSpec spec;
  const auto& table = instruction_features();
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) spec.widths[f] = table[f].width;
  return spec;
}

std::size_t FeatureSpec::total() const {
  return std::accumulate(widths.begin(), widths.end(), std::size_t{0});
}

Vocabulary Vocabulary::build(std::span<const SampleGraph> train_samples, const FeatureSpec& spec) {
  Vocabulary vocab;
  vocab.spec_ = spec;
  for (const SampleGraph& g : train_samples) {
    for (const NodePayload& node : g.payload()) {
      for (const InstructionRecord& instr : node) {
        for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
          const std::uint32_t raw = instr.codes[f];
          if (raw >= spec.widths[f]) {
            throw std::invalid_argument("sample " + g.id() + ": raw code " + std::to_string(raw) + " of " +
                                        std::string(instruction_features()[f].name) + " exceeds width " +
                                        std::to_string(spec.widths[f]));
          }
          if (vocab.lookup_[f].emplace(raw, vocab.codes_[f].size()).second) vocab.codes_[f].push_back(raw);
        }
      }
    }
  }
  vocab.finalize();
  return vocab;
}

void Vocabulary::finalize() {
  std::size_t offset = 0;
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
    lookup_[f].clear();
    for (std::size_t i = 0; i < codes_[f].size(); ++i) lookup_[f].emplace(codes_[f][i], i);
    offsets_[f] = offset;
    offset += block_width(f);
  }
  total_width_ = offset;
}

std::size_t Vocabulary::local_index(std::size_t feature, std::uint32_t raw) const {
  auto it = lookup_[feature].find(raw);
  return it == lookup_[feature].end() ? codes_[feature].size() : it->second;
}

bool Vocabulary::is_oov(std::size_t feature, std::uint32_t raw) const {
  return lookup_[feature].find(raw) == lookup_[feature].end();
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json out;
  out["version"] = kVocabularyVersion;
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
    nlohmann::ordered_json entry;
    entry["name"] = std::string(instruction_features()[f].name);
    entry["width"] = spec_.widths[f];
    entry["codes"] = codes_[f];
    features.push_back(std::move(entry));
  }
  out["features"] = std::move(features);
  return out.dump(1);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  if (in.at("version").get<int>() != kVocabularyVersion) {
    throw std::runtime_error("unsupported vocabulary version " + in.at("version").dump());
  }
  const auto& features = in.at("features");
  if (!features.is_array() || features.size() != kNumInstructionFeatures) {
    throw std::runtime_error("vocabulary must list 25 features");
  }
  Vocabulary vocab;
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
    const auto& entry = features[f];
    if (entry.at("name").get<std::string>() != instruction_features()[f].name) {
      throw std::runtime_error("vocabulary feature " + std::to_string(f) + " is out of order");
    }
    vocab.spec_.widths[f] = entry.at("width").get<std::uint32_t>();
    vocab.codes_[f] = entry.at("codes").get<std::vector<std::uint32_t>>();
  }
  vocab.finalize();
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

SparseOneHot encode_instruction(const InstructionRecord& instr, const Vocabulary& vocab) {
  SparseOneHot out{};
  for (std::size_t f = 0; f < kNumInstructionFeatures; ++f) {
    out[f] = static_cast<std::uint32_t>(vocab.offset(f) + vocab.local_index(f, instr.codes[f]));
  }
  return out;
}

Eigen::VectorXd to_dense(const SparseOneHot& code, const Vocabulary& vocab) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab.total_width()));
  for (std::uint32_t col : code) v[col] = 1.0;
  return v;
}

SampleGraph embed_cfg_nodes(const SampleGraph& g, const Vocabulary& vocab) {
  if (g.level() != Level::kCfg && g.level() != Level::kCoarseCfg) {
    throw std::invalid_argument("embed_cfg_nodes expects a CFG or C-CFG sample, got " + std::string(to_string(g.level())));
  }
  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.num_nodes()),
                                                   static_cast<Eigen::Index>(vocab.total_width()));
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (g.payload()[i].empty()) {
      log_warning("sample " + g.id() + ": node " + std::to_string(g.nodes()[i]) + " has no instructions");
      continue;
    }
    for (const InstructionRecord& instr : g.payload()[i]) {
      for (std::uint32_t col : encode_instruction(instr, vocab)) features(static_cast<Eigen::Index>(i), col) += 1.0;
    }
  }
  return g.with_features(std::move(features));
}

SampleGraph embed_bafg_nodes(const SampleGraph& g, const Vocabulary& vocab) {
  if (g.level() != Level::kBacktrackedAfg && g.level() != Level::kAfg) {
    throw std::invalid_argument("embed_bafg_nodes expects an AFG-level sample, got " + std::string(to_string(g.level())));
  }
  const std::size_t width = vocab.block_width(kOpcode0Feature);
  Eigen::MatrixXd features =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.num_nodes()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const std::size_t col = vocab.local_index(kOpcode0Feature, g.payload()[i].front().opcode0());
    features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = 1.0;
  }
  return g.with_features(std::move(features));
}

}  // namespace metacoarse
