#pragma once

// Independent reference implementations used as test oracles. These are
// written as straight-line per-node computations (plain loops, list order, no
// tape, no batching) so they share no code path with the library.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "mgccf/dataset.hpp"
#include "mgccf/model.hpp"

namespace mgccf::testing {

// --- straight-line Bipar-GCN ---------------------------------------------------

inline std::vector<double> vec_mat(const std::vector<double>& x, const Matrix& w) {
  std::vector<double> out(w.cols, 0.0);
  for (int r = 0; r < w.rows; ++r) {
    for (int c = 0; c < w.cols; ++c) out[c] += x[r] * w.at(r, c);
  }
  return out;
}

inline std::vector<double> ref_bipar_h(const MultiGccfModel& m, Side root_side, int depth,
                                       int node, int k, const NeighborSource& nbrs) {
  const Side side = depth % 2 == 0 ? root_side : other_side(root_side);
  const Matrix& e = m.embeddings(side).value;
  if (k == 0) {
    return {e.row(node), e.row(node) + e.cols};
  }
  const auto& layer = (side == Side::kUser ? m.user_layers : m.item_layers)[k - 1];
  std::vector<int> children;
  nbrs.append_neighbors(side, depth + 1, node, children);
  std::vector<double> mean(layer.Q.cols, 0.0);
  for (int child : children) {
    const auto child_h = ref_bipar_h(m, root_side, depth + 1, child, k - 1, nbrs);
    const auto proj = vec_mat(child_h, layer.Q.value);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += proj[c];
  }
  if (!children.empty()) {
    for (double& v : mean) v /= static_cast<double>(children.size());
  }
  for (double& v : mean) v = std::tanh(v);
  const auto self_h = ref_bipar_h(m, root_side, depth, node, k - 1, nbrs);
  std::vector<double> cat = self_h;
  cat.insert(cat.end(), mean.begin(), mean.end());
  auto out = vec_mat(cat, layer.W.value);
  for (double& v : out) v = std::tanh(v);
  return out;
}

inline std::vector<double> ref_bipar_encode(const MultiGccfModel& m, Side side, int node,
                                            const NeighborSource& nbrs) {
  return ref_bipar_h(m, side, 0, node, m.config.num_gcn_layers, nbrs);
}

inline std::vector<double> ref_mge_encode(const MultiGccfModel& m, Side side, int node,
                                          const SimilarityGraph& graph) {
  const Matrix& e = m.embeddings(side).value;
  const Matrix& proj = (side == Side::kUser ? m.M_user : m.M_item).value;
  std::vector<double> out(proj.cols, 0.0);
  for (int nb : graph.neighbors[node]) {
    const std::vector<double> row{e.row(nb), e.row(nb) + e.cols};
    const auto p = vec_mat(row, proj);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += p[c];
  }
  for (double& v : out) v = std::tanh(v);
  return out;
}

inline std::vector<double> ref_skip_encode(const MultiGccfModel& m, Side side, int node) {
  const Matrix& e = m.embeddings(side).value;
  const Matrix& proj = (side == Side::kUser ? m.S_user : m.S_item).value;
  std::vector<double> row{e.row(node), e.row(node) + e.cols};
  auto out = vec_mat(row, proj);
  for (double& v : out) v = std::tanh(v);
  return out;
}

// --- scalar Adam reference -----------------------------------------------------

struct ScalarAdam {
  double m = 0.0, v = 0.0;
  long t = 0;
  double step(double x, double g, double lr, double b1 = 0.9, double b2 = 0.999,
              double eps = 1e-8) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, static_cast<double>(t)));
    const double vh = v / (1 - std::pow(b2, static_cast<double>(t)));
    return x - lr * mh / (std::sqrt(vh) + eps);
  }
};

// --- brute-force ranking metrics -------------------------------------------------

inline double ref_recall(const std::vector<int>& ranked, const std::set<int>& relevant, int k) {
  if (relevant.empty()) return 0.0;
  int hits = 0;
  for (int n = 0; n < std::min<int>(k, static_cast<int>(ranked.size())); ++n) {
    hits += relevant.count(ranked[n]) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

inline double ref_ndcg(const std::vector<int>& ranked, const std::set<int>& relevant, int k) {
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  for (int n = 0; n < std::min<int>(k, static_cast<int>(ranked.size())); ++n) {
    const double rel = relevant.count(ranked[n]) ? 1.0 : 0.0;
    dcg += (std::pow(2.0, rel) - 1.0) / std::log2(static_cast<double>(n) + 2.0);
  }
  double idcg = 0.0;
  for (int n = 0; n < std::min<int>(k, static_cast<int>(relevant.size())); ++n) {
    idcg += 1.0 / std::log2(static_cast<double>(n) + 2.0);
  }
  return dcg / idcg;
}

// --- chi-squared bound ----------------------------------------------------------

// Wilson-Hilferty upper quantile approximation, z = 3.09 ~ p = 0.999.
inline double chi2_bound(int dof, double z = 3.09) {
  const double a = 2.0 / (9.0 * dof);
  const double base = 1.0 - a + z * std::sqrt(a);
  return dof * base * base * base;
}

// --- synthetic block dataset ------------------------------------------------------

struct BlockDataset {
  InteractionDataset ds;
  std::vector<int> user_block;  // aligned with ds indices
  std::vector<int> item_block;
};

// Users/items partitioned into `blocks` groups; within-block interaction
// probability p_in, cross-block p_out. Filtered and split like production data.
inline BlockDataset make_block_dataset(int num_users, int num_items, int blocks, double p_in,
                                       double p_out, std::uint64_t seed,
                                       int min_interactions = 10) {
  const int users_per_block = num_users / blocks;
  const int items_per_block = num_items / blocks;
  Rng rng(seed);
  std::vector<RawPair> raw;
  for (int u = 0; u < num_users; ++u) {
    const int ub = std::min(u / users_per_block, blocks - 1);
    for (int i = 0; i < num_items; ++i) {
      const int ib = std::min(i / items_per_block, blocks - 1);
      const double p = ub == ib ? p_in : p_out;
      if (rng.uniform() < p) {
        raw.emplace_back("u" + std::to_string(u), "i" + std::to_string(i));
      }
    }
  }
  const IndexedInteractions indexed = filter_and_index(raw, min_interactions);
  BlockDataset out;
  out.ds = split(indexed, SplitRatios{}, Rng::mix(seed, 0x5));
  out.user_block.resize(out.ds.num_users);
  out.item_block.resize(out.ds.num_items);
  for (int u = 0; u < out.ds.num_users; ++u) {
    const int orig = std::stoi(out.ds.user_ids[u].substr(1));
    out.user_block[u] = std::min(orig / users_per_block, blocks - 1);
  }
  for (int i = 0; i < out.ds.num_items; ++i) {
    const int orig = std::stoi(out.ds.item_ids[i].substr(1));
    out.item_block[i] = std::min(orig / items_per_block, blocks - 1);
  }
  return out;
}

}  // namespace mgccf::testing
