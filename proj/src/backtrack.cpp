#include "metacoarse/backtrack.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace metacoarse {

BacktrackResult build_bafg(const ExplanationMask& selection, const CoarseningMap& cmap,
                           const AfgCorrespondence& corr, const SampleGraph& afg) {
  const std::string& id = selection.sample_id;
  if (afg.id() != id) throw std::invalid_argument("explanation " + id + " paired with AFG " + afg.id());
  if (afg.level() != Level::kAfg) throw std::invalid_argument("sample " + id + ": backtracking needs an AFG-level graph");
  if (cmap.original_nodes() != corr.cfg_nodes()) {
    throw std::invalid_argument("sample " + id + ": coarsening map and AFG correspondence cover different CFG nodes");
  }
  if (corr.num_afg_nodes() != afg.num_nodes()) {
    throw std::invalid_argument("sample " + id + ": AFG correspondence covers " + std::to_string(corr.num_afg_nodes()) +
                                " nodes, AFG has " + std::to_string(afg.num_nodes()));
  }

  BacktrackRecord record;
  record.sample_id = id;
  record.bafg_id = id;
  record.selected_supernodes = selection.selected_nodes;
  for (NodeId s : selection.selected_nodes) {
    if (s >= cmap.num_supernodes()) {
      throw std::invalid_argument("sample " + id + ": selected supernode " + std::to_string(s) +
                                  " is not in the coarsening map");
    }
  }
  record.cfg_nodes = backtrack_nodes(cmap, record.selected_supernodes);
  for (NodeId c : record.cfg_nodes) {
    const auto& list = corr.instruction_list(c);
    record.afg_nodes.insert(record.afg_nodes.end(), list.begin(), list.end());
  }
  std::sort(record.afg_nodes.begin(), record.afg_nodes.end());
  for (NodeId a : record.afg_nodes) {
    if (!afg.index_of(a)) {
      throw std::invalid_argument("sample " + id + ": resolved AFG node " + std::to_string(a) + " is not in the AFG");
    }
  }

  SampleGraph bafg = induced_subgraph(afg, record.afg_nodes, Level::kBacktrackedAfg);
  return {std::move(bafg), std::move(record)};
}

std::string BacktrackRecord::to_json() const {
  nlohmann::ordered_json out;
  out["id"] = sample_id;
  out["selected_supernodes"] = selected_supernodes;
  out["cfg_nodes"] = cfg_nodes;
  out["afg_nodes"] = afg_nodes;
  out["bafg_id"] = bafg_id;
  return out.dump();
}

BacktrackRecord BacktrackRecord::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  BacktrackRecord r;
  r.sample_id = in.at("id").get<std::string>();
  r.selected_supernodes = in.at("selected_supernodes").get<std::vector<NodeId>>();
  r.cfg_nodes = in.at("cfg_nodes").get<std::vector<NodeId>>();
  r.afg_nodes = in.at("afg_nodes").get<std::vector<NodeId>>();
  r.bafg_id = in.at("bafg_id").get<std::string>();
  return r;
}

BafgDataset assemble_bafg_dataset(const DatasetSplit& split, const std::map<std::string, SampleGraph>& bafgs,
                                  const Vocabulary& vocab) {
  BafgDataset out;
  out.feature_width = vocab.block_width(kOpcode0Feature);
  auto fill = [&](const std::vector<std::string>& ids, std::vector<SampleGraph>& dest, const char* part) {
    for (const std::string& id : ids) {
      auto it = bafgs.find(id);
      if (it == bafgs.end()) throw std::invalid_argument(std::string(part) + " sample " + id + " has no B-AFG");
      dest.push_back(embed_bafg_nodes(it->second, vocab));
    }
  };
  fill(split.train_ids, out.train, "train");
  fill(split.val_ids, out.val, "validation");
  fill(split.test_ids, out.test, "test");
  return out;
}

}  // namespace metacoarse
