#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgccf/rng.hpp"

namespace mgccf {

// One implicit-feedback event. Indices are 0-based and contiguous.
struct Interaction {
  int user = 0;
  int item = 0;
  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// BPR training triple: positive item i observed for u, negative j unobserved.
struct Triplet {
  int u = 0;
  int i = 0;
  int j = 0;
};

enum class DatasetFormat { kAuto, kWhitespace, kCsv };

using RawPair = std::pair<std::string, std::string>;

// Reads one interaction per line (user item [rating] [timestamp], whitespace or
// comma separated, '#' comments skipped) and collapses duplicates, keeping
// first-appearance order. Ratings/timestamps are accepted and discarded.
std::vector<RawPair> load_interactions(const std::string& path,
                                       DatasetFormat format = DatasetFormat::kAuto);
std::vector<RawPair> parse_interactions(std::istream& in, DatasetFormat format,
                                        const std::string& source_name);

// Survivors of the min-interaction filter, remapped to contiguous indices
// (first-appearance order), before splitting.
struct IndexedInteractions {
  int num_users = 0;
  int num_items = 0;
  std::vector<Interaction> interactions;
  std::vector<std::string> user_ids;  // index -> raw id
  std::vector<std::string> item_ids;
};

// Iteratively removes users/items with fewer than min_interactions total
// interactions until a fixed point, then remaps survivors.
IndexedInteractions filter_and_index(const std::vector<RawPair>& raw, int min_interactions);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

class InteractionDataset {
 public:
  int num_users = 0;
  int num_items = 0;
  std::vector<Interaction> train;
  std::vector<Interaction> validation;
  std::vector<Interaction> test;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;

  // Sorted per-user item lists, rebuilt by finalize().
  const std::vector<std::vector<int>>& train_items() const { return train_items_; }
  const std::vector<std::vector<int>>& validation_items() const { return validation_items_; }
  const std::vector<std::vector<int>>& test_items() const { return test_items_; }

  bool observed(int user, int item) const;       // any split
  bool in_train(int user, int item) const;
  int user_index(const std::string& raw) const;  // -1 when absent
  int item_index(const std::string& raw) const;
  std::size_t total_interactions() const { return train.size() + validation.size() + test.size(); }
  double density() const;  // interactions / (users * items)

  // Rebuilds the per-user indexes from the split vectors. Must be called after
  // the split vectors change; the dataset is immutable afterwards.
  void finalize();

 private:
  std::vector<std::vector<int>> train_items_, validation_items_, test_items_, observed_items_;
  std::unordered_map<std::string, int> user_index_, item_index_;
};

// Per-user random split at the given ratios. Every user contributes at least
// one interaction to each split, and every item is forced to retain at least
// one train interaction. Deterministic under the seed.
InteractionDataset split(const IndexedInteractions& indexed, const SplitRatios& ratios,
                         std::uint64_t seed);

// Uniformly samples (u,i) from train, then j uniformly over items until (u,j)
// is unobserved in any split. Users interacting with every item are skipped.
std::vector<Triplet> sample_triplets(const InteractionDataset& ds, int batch_size, Rng& rng);

}  // namespace mgccf
