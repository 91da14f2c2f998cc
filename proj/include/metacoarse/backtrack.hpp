#ifndef METACOARSE_BACKTRACK_HPP_
#define METACOARSE_BACKTRACK_HPP_

#include <map>
#include <string>
#include <vector>

#include "metacoarse/afg.hpp"
#include "metacoarse/coarsen.hpp"
#include "metacoarse/dataset.hpp"
#include "metacoarse/encode.hpp"
#include "metacoarse/explain.hpp"
#include "metacoarse/graph.hpp"

namespace metacoarse {

struct BacktrackRecord {
  std::string sample_id;
  std::vector<NodeId> selected_supernodes;
  std::vector<NodeId> cfg_nodes;
  std::vector<NodeId> afg_nodes;
  std::string bafg_id;

  std::string to_json() const;
  static BacktrackRecord from_json(const std::string& text);
};

struct BacktrackResult {
  SampleGraph bafg;
  BacktrackRecord record;
};

// Resolves the selected supernodes through the coarsening blocks and the
// instruction lists, then keeps the AFG edges whose endpoints are both
// resolved. Throws std::invalid_argument naming the broken link when the maps
// do not belong together.
BacktrackResult build_bafg(const ExplanationMask& selection, const CoarseningMap& cmap,
                           const AfgCorrespondence& corr, const SampleGraph& afg);

struct BafgDataset {
  std::vector<SampleGraph> train;
  std::vector<SampleGraph> val;
  std::vector<SampleGraph> test;
  std::size_t feature_width = 0;
};

// Mirrors the split ids and embeds each B-AFG with the reduced opcode_0 block.
// Throws std::invalid_argument if a split id has no B-AFG.
BafgDataset assemble_bafg_dataset(const DatasetSplit& split, const std::map<std::string, SampleGraph>& bafgs,
                                  const Vocabulary& vocab);

}  // namespace metacoarse

#endif  // METACOARSE_BACKTRACK_HPP_
