#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgccf/dataset.hpp"
#include "mgccf/graphs.hpp"
#include "mgccf/optim.hpp"

namespace mgccf {

// Binary file layouts (little-endian, versioned magic header):
//   dataset snapshot  "MGDS" v1: counts, raw-id tables, split interaction lists
//   graph bundle      "MGGB" v1: build params, adjacency, similarity graphs,
//                                 pre-sampled tables, capped eval lists
//   checkpoint        "MGCK" v1: JSON header (model config), named parameters
//                                 with value + Adam state, bit-exact round-trip
// Identical inputs produce byte-identical files.

void save_dataset(const InteractionDataset& ds, const std::string& path);
InteractionDataset load_dataset(const std::string& path);

void save_bundle(const GraphBundle& bundle, const std::string& path);
GraphBundle load_bundle(const std::string& path);

void save_checkpoint(const std::string& path, const std::string& header_json,
                     const std::vector<const Parameter*>& params);

struct Checkpoint {
  std::string header_json;
  std::vector<Parameter> params;

  const Parameter* find(const std::string& name) const;
};

Checkpoint load_checkpoint(const std::string& path);

std::uint64_t fnv1a_file(const std::string& path);

}  // namespace mgccf
