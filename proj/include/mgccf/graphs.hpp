#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mgccf/dataset.hpp"

namespace mgccf {

enum class Side { kUser, kItem };
inline Side other_side(Side s) { return s == Side::kUser ? Side::kItem : Side::kUser; }

// Train-set adjacency. user_neighbors[u] holds item indices, item_neighbors[v]
// holds user indices; both sorted ascending.
struct BipartiteGraph {
  std::vector<std::vector<int>> user_neighbors;
  std::vector<std::vector<int>> item_neighbors;

  int num_users() const { return static_cast<int>(user_neighbors.size()); }
  int num_items() const { return static_cast<int>(item_neighbors.size()); }
  const std::vector<std::vector<int>>& side(Side s) const {
    return s == Side::kUser ? user_neighbors : item_neighbors;
  }
  std::size_t num_edges() const;
};

BipartiteGraph build_bipartite(const InteractionDataset& ds);

// Cosine similarity of two binary vectors given as sorted support lists:
// |a n b| / sqrt(|a|*|b|), 0 when either is empty.
double cosine_similarity(std::span<const int> a, std::span<const int> b);

// Homogeneous thresholded similarity graph (user-user or item-item).
struct SimilarityGraph {
  std::vector<std::vector<int>> neighbors;  // sorted, no self-loops, symmetric
  double threshold = 0.0;
  int target_avg_degree = 0;
  bool target_unreachable = false;

  int num_nodes() const { return static_cast<int>(neighbors.size()); }
  double avg_degree() const;
};

struct SimilarityBuildParams {
  int target_avg_degree = 10;
  // Neighbor lists are capped by keeping each node's highest-similarity
  // neighbors; an edge survives only if it is in both endpoints' kept sets,
  // which preserves symmetry.
  int max_degree_cap = 64;
  // Above this node count the calibration estimates average degree on a
  // sampled node subset instead of scanning all pairs.
  int exact_count_cutoff = 20000;
  int degree_sample_nodes = 2000;
  std::uint64_t sample_seed = 1;
  bool parallel = true;
};

// Largest threshold t (binary search on [0,1], tolerance 1e-4) such that
// keeping edges with similarity >= t yields average degree >= target.
// Zero-similarity pairs never count as edges. Sets *unreachable (and returns
// t = 0) when even t = 0 cannot reach the target.
double calibrate_threshold(const std::vector<std::vector<int>>& supports, int target_avg_degree,
                           const SimilarityBuildParams& params, bool* unreachable);

enum class Axis { kUsers, kItems };

// Thresholded cosine-similarity graph over interaction-matrix rows (users) or
// columns (items), built from train interactions only.
SimilarityGraph build_similarity_graph(const InteractionDataset& ds, Axis axis,
                                       const SimilarityBuildParams& params);
SimilarityGraph build_similarity_graph_serial(const InteractionDataset& ds, Axis axis,
                                              const SimilarityBuildParams& params);

// Per-node positive cosine similarities (other index, similarity), computed
// through an inverted index. Exposed for calibration, tests and the bench.
std::vector<std::pair<int, double>> positive_similarities(
    int node, const std::vector<std::vector<int>>& supports,
    const std::vector<std::vector<int>>& inverted);
std::vector<std::vector<int>> invert_supports(const std::vector<std::vector<int>>& supports,
                                              int universe);

// Pre-sampled fixed-size neighbor lists for Bipar-GCN training: for each side,
// bipartite tree depth (sizes[k] entries at layer k+1) and node, num_sets
// independent uniform-with-replacement samples. Zero-degree nodes store a -1
// sentinel and report an empty list.
class SampledNeighborTable {
 public:
  SampledNeighborTable() = default;
  SampledNeighborTable(std::vector<int> sizes, int num_sets, int num_users, int num_items);

  std::span<const std::int32_t> list(Side side, int layer, int node, int set) const;
  std::span<std::int32_t> mutable_list(Side side, int layer, int node, int set);

  int num_layers() const { return static_cast<int>(sizes_.size()); }
  int num_sets() const { return num_sets_; }
  const std::vector<int>& sizes() const { return sizes_; }
  int num_nodes(Side side) const { return side == Side::kUser ? num_users_ : num_items_; }

  std::vector<std::vector<std::int32_t>>& storage(Side side) {
    return side == Side::kUser ? user_layers_ : item_layers_;
  }
  const std::vector<std::vector<std::int32_t>>& storage(Side side) const {
    return side == Side::kUser ? user_layers_ : item_layers_;
  }

 private:
  std::vector<int> sizes_;
  int num_sets_ = 0;
  int num_users_ = 0;
  int num_items_ = 0;
  // [layer] -> flat [node][set][sizes_[layer]] arrays.
  std::vector<std::vector<std::int32_t>> user_layers_;
  std::vector<std::vector<std::int32_t>> item_layers_;
};

// Draws the full table with per-node RNG streams derived from `seed`, so the
// (parallel) construction order cannot change the result.
SampledNeighborTable presample(const BipartiteGraph& graph, const std::vector<int>& sizes,
                               int num_sets, std::uint64_t seed);

// Full neighbor lists for inference, capped at `cap` by keeping the
// highest-degree neighbors (ties to the lower index).
std::vector<std::vector<int>> capped_eval_lists(const BipartiteGraph& graph, Side side, int cap);

// Alternative inference lists: per-node union of all pre-sampled sets.
std::vector<std::vector<int>> sampled_union_lists(const SampledNeighborTable& table, Side side);

struct GraphBundleParams {
  int target_avg_degree = 10;
  int max_degree_cap = 64;
  int exact_count_cutoff = 20000;
  int degree_sample_nodes = 2000;
  int max_eval_neighbors = 50;
  std::vector<int> sample_sizes = {15, 10};
  int num_presample_sets = 30;
  std::uint64_t seed = 1;
};

// Everything a training run needs besides the dataset itself.
struct GraphBundle {
  BipartiteGraph bipartite;
  SimilarityGraph user_graph;
  SimilarityGraph item_graph;
  SampledNeighborTable sampled;
  std::vector<std::vector<int>> eval_user_lists;  // capped full lists
  std::vector<std::vector<int>> eval_item_lists;
  GraphBundleParams params;
};

GraphBundle build_graph_bundle(const InteractionDataset& ds, const GraphBundleParams& params);

}  // namespace mgccf
