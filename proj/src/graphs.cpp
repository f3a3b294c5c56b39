#include "mgccf/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mgccf/errors.hpp"

namespace mgccf {

std::size_t BipartiteGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& v : user_neighbors) n += v.size();
  return n;
}

BipartiteGraph build_bipartite(const InteractionDataset& ds) {
  if (ds.train.empty()) throw DatasetError("cannot build a bipartite graph: train set empty");
  BipartiteGraph g;
  g.user_neighbors.assign(ds.num_users, {});
  g.item_neighbors.assign(ds.num_items, {});
  for (const auto& x : ds.train) {
    g.user_neighbors[x.user].push_back(x.item);
    g.item_neighbors[x.item].push_back(x.user);
  }
  for (auto& v : g.user_neighbors) std::sort(v.begin(), v.end());
  for (auto& v : g.item_neighbors) std::sort(v.begin(), v.end());
  return g;
}

double cosine_similarity(std::span<const int> a, std::span<const int> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  if (common == 0) return 0.0;
  return static_cast<double>(common) /
         std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double SimilarityGraph::avg_degree() const {
  if (neighbors.empty()) return 0.0;
  std::size_t deg = 0;
  for (const auto& v : neighbors) deg += v.size();
  return static_cast<double>(deg) / static_cast<double>(neighbors.size());
}

std::vector<std::vector<int>> invert_supports(const std::vector<std::vector<int>>& supports,
                                              int universe) {
  std::vector<std::vector<int>> inv(universe);
  for (int n = 0; n < static_cast<int>(supports.size()); ++n) {
    for (int e : supports[n]) inv[e].push_back(n);
  }
  return inv;
}

std::vector<std::pair<int, double>> positive_similarities(
    int node, const std::vector<std::vector<int>>& supports,
    const std::vector<std::vector<int>>& inverted) {
  std::unordered_map<int, int> co_count;
  for (int e : supports[node]) {
    for (int other : inverted[e]) {
      if (other != node) ++co_count[other];
    }
  }
  std::vector<std::pair<int, double>> sims;
  sims.reserve(co_count.size());
  const double self_len = static_cast<double>(supports[node].size());
  for (const auto& [other, co] : co_count) {
    const double sim =
        static_cast<double>(co) / std::sqrt(self_len * static_cast<double>(supports[other].size()));
    sims.emplace_back(other, sim);
  }
  std::sort(sims.begin(), sims.end());
  return sims;
}

namespace {

int max_support_element(const std::vector<std::vector<int>>& supports) {
  int mx = -1;
  for (const auto& s : supports) {
    if (!s.empty()) mx = std::max(mx, s.back());
  }
  return mx;
}

// Average degree if every positive-similarity pair with sim >= t is an edge,
// measured over the given nodes.
double avg_degree_at(const std::vector<std::vector<std::pair<int, double>>>& node_sims,
                     const std::vector<int>& nodes, double t) {
  if (nodes.empty()) return 0.0;
  std::size_t deg = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (const auto& [other, sim] : node_sims[k]) {
      if (sim >= t) ++deg;
    }
  }
  return static_cast<double>(deg) / static_cast<double>(nodes.size());
}

}  // namespace

double calibrate_threshold(const std::vector<std::vector<int>>& supports, int target_avg_degree,
                           const SimilarityBuildParams& params, bool* unreachable) {
  if (target_avg_degree < 1) throw ConfigError("target_avg_degree must be >= 1");
  const int n = static_cast<int>(supports.size());
  if (unreachable) *unreachable = false;
  if (n == 0) {
    if (unreachable) *unreachable = true;
    return 0.0;
  }

  // Degree is evaluated on all nodes when small enough, on a seeded uniform
  // node sample otherwise.
  std::vector<int> probe_nodes;
  if (n <= params.exact_count_cutoff || n <= params.degree_sample_nodes) {
    probe_nodes.resize(n);
    for (int i = 0; i < n; ++i) probe_nodes[i] = i;
  } else {
    Rng rng(Rng::mix(params.sample_seed, 0xca11b8ull));
    std::vector<char> taken(n, 0);
    while (static_cast<int>(probe_nodes.size()) < params.degree_sample_nodes) {
      const int cand = static_cast<int>(rng.uniform_index(n));
      if (!taken[cand]) {
        taken[cand] = 1;
        probe_nodes.push_back(cand);
      }
    }
    std::sort(probe_nodes.begin(), probe_nodes.end());
  }

  const auto inverted = invert_supports(supports, max_support_element(supports) + 1);
  std::vector<std::vector<std::pair<int, double>>> node_sims(probe_nodes.size());
#pragma omp parallel for schedule(dynamic, 16) if (params.parallel)
  for (int k = 0; k < static_cast<int>(probe_nodes.size()); ++k) {
    node_sims[k] = positive_similarities(probe_nodes[k], supports, inverted);
  }

  if (avg_degree_at(node_sims, probe_nodes, 0.0) < static_cast<double>(target_avg_degree)) {
    if (unreachable) *unreachable = true;
    return 0.0;
  }
  double lo = 0.0, hi = 1.0;
  if (avg_degree_at(node_sims, probe_nodes, 1.0) >= static_cast<double>(target_avg_degree)) {
    return 1.0;
  }
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (avg_degree_at(node_sims, probe_nodes, mid) >= static_cast<double>(target_avg_degree)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

namespace {

SimilarityGraph build_similarity_impl(const InteractionDataset& ds, Axis axis,
                                      const SimilarityBuildParams& params) {
  const int n = axis == Axis::kUsers ? ds.num_users : ds.num_items;
  const int universe = axis == Axis::kUsers ? ds.num_items : ds.num_users;
  std::vector<std::vector<int>> supports(n);
  for (const auto& x : ds.train) {
    if (axis == Axis::kUsers) {
      supports[x.user].push_back(x.item);
    } else {
      supports[x.item].push_back(x.user);
    }
  }
  for (auto& s : supports) std::sort(s.begin(), s.end());

  SimilarityGraph g;
  g.target_avg_degree = params.target_avg_degree;
  g.threshold =
      calibrate_threshold(supports, params.target_avg_degree, params, &g.target_unreachable);

  const auto inverted = invert_supports(supports, universe);

  // Per-node kept sets: all neighbors at the threshold, trimmed to the
  // highest-similarity max_degree_cap. An edge survives only if both endpoints
  // kept it (symmetric by construction).
  std::vector<std::vector<int>> kept(n);
#pragma omp parallel for schedule(dynamic, 16) if (params.parallel)
  for (int node = 0; node < n; ++node) {
    auto sims = positive_similarities(node, supports, inverted);
    std::erase_if(sims, [&](const auto& p) { return p.second < g.threshold; });
    if (static_cast<int>(sims.size()) > params.max_degree_cap) {
      std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      sims.resize(params.max_degree_cap);
    }
    auto& k = kept[node];
    k.reserve(sims.size());
    for (const auto& [other, sim] : sims) k.push_back(other);
    std::sort(k.begin(), k.end());
  }

  g.neighbors.assign(n, {});
  for (int node = 0; node < n; ++node) {
    for (int other : kept[node]) {
      if (std::binary_search(kept[other].begin(), kept[other].end(), node)) {
        g.neighbors[node].push_back(other);
      }
    }
  }
  return g;
}

}  // namespace

SimilarityGraph build_similarity_graph(const InteractionDataset& ds, Axis axis,
                                       const SimilarityBuildParams& params) {
  return build_similarity_impl(ds, axis, params);
}

SimilarityGraph build_similarity_graph_serial(const InteractionDataset& ds, Axis axis,
                                              const SimilarityBuildParams& params) {
  SimilarityBuildParams p = params;
  p.parallel = false;
  return build_similarity_impl(ds, axis, p);
}

SampledNeighborTable::SampledNeighborTable(std::vector<int> sizes, int num_sets, int num_users,
                                           int num_items)
    : sizes_(std::move(sizes)), num_sets_(num_sets), num_users_(num_users), num_items_(num_items) {
  if (num_sets_ < 1) throw ConfigError("num_sets must be >= 1");
  for (int s : sizes_) {
    if (s < 1) throw ConfigError("sample sizes must be >= 1");
  }
  user_layers_.resize(sizes_.size());
  item_layers_.resize(sizes_.size());
  for (std::size_t layer = 0; layer < sizes_.size(); ++layer) {
    user_layers_[layer].assign(
        static_cast<std::size_t>(num_users_) * num_sets_ * sizes_[layer], -1);
    item_layers_[layer].assign(
        static_cast<std::size_t>(num_items_) * num_sets_ * sizes_[layer], -1);
  }
}

std::span<const std::int32_t> SampledNeighborTable::list(Side side, int layer, int node,
                                                         int set) const {
  if (layer < 1 || layer > num_layers()) {
    throw ConfigError("sampled neighbor table has " + std::to_string(num_layers()) +
                      " layers, layer " + std::to_string(layer) + " requested");
  }
  const int s = sizes_[layer - 1];
  const auto& flat = storage(side)[layer - 1];
  const std::size_t base =
      (static_cast<std::size_t>(node) * num_sets_ + set) * static_cast<std::size_t>(s);
  if (flat[base] < 0) return {};  // zero-degree sentinel
  return {flat.data() + base, static_cast<std::size_t>(s)};
}

std::span<std::int32_t> SampledNeighborTable::mutable_list(Side side, int layer, int node,
                                                           int set) {
  const int s = sizes_[layer - 1];
  auto& flat = storage(side)[layer - 1];
  const std::size_t base =
      (static_cast<std::size_t>(node) * num_sets_ + set) * static_cast<std::size_t>(s);
  return {flat.data() + base, static_cast<std::size_t>(s)};
}

SampledNeighborTable presample(const BipartiteGraph& graph, const std::vector<int>& sizes,
                               int num_sets, std::uint64_t seed) {
  SampledNeighborTable table(sizes, num_sets, graph.num_users(), graph.num_items());
  for (Side side : {Side::kUser, Side::kItem}) {
    const auto& adj = graph.side(side);
    const int n = static_cast<int>(adj.size());
    for (int layer = 1; layer <= table.num_layers(); ++layer) {
      const std::uint64_t stream_base =
          Rng::mix(seed, (side == Side::kUser ? 2ull : 3ull) * 1000003ull + layer);
#pragma omp parallel for schedule(static)
      for (int node = 0; node < n; ++node) {
        const auto& nbrs = adj[node];
        if (nbrs.empty()) continue;  // leave the -1 sentinel
        Rng rng(Rng::mix(stream_base, static_cast<std::uint64_t>(node)));
        for (int set = 0; set < num_sets; ++set) {
          auto out = table.mutable_list(side, layer, node, set);
          for (auto& slot : out) {
            slot = static_cast<std::int32_t>(nbrs[rng.uniform_index(nbrs.size())]);
          }
        }
      }
    }
  }
  return table;
}

std::vector<std::vector<int>> capped_eval_lists(const BipartiteGraph& graph, Side side, int cap) {
  const auto& adj = graph.side(side);
  const auto& opposite = graph.side(other_side(side));
  std::vector<std::vector<int>> out(adj.size());
  for (std::size_t node = 0; node < adj.size(); ++node) {
    const auto& nbrs = adj[node];
    if (static_cast<int>(nbrs.size()) <= cap) {
      out[node] = nbrs;
      continue;
    }
    std::vector<int> trimmed = nbrs;
    std::sort(trimmed.begin(), trimmed.end(), [&](int a, int b) {
      const auto da = opposite[a].size(), db = opposite[b].size();
      if (da != db) return da > db;
      return a < b;
    });
    trimmed.resize(cap);
    std::sort(trimmed.begin(), trimmed.end());
    out[node] = std::move(trimmed);
  }
  return out;
}

std::vector<std::vector<int>> sampled_union_lists(const SampledNeighborTable& table, Side side) {
  std::vector<std::vector<int>> out(table.num_nodes(side));
  for (int node = 0; node < table.num_nodes(side); ++node) {
    std::vector<int> u;
    for (int layer = 1; layer <= table.num_layers(); ++layer) {
      for (int set = 0; set < table.num_sets(); ++set) {
        for (std::int32_t v : table.list(side, layer, node, set)) u.push_back(v);
      }
    }
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    out[node] = std::move(u);
  }
  return out;
}

GraphBundle build_graph_bundle(const InteractionDataset& ds, const GraphBundleParams& params) {
  GraphBundle b;
  b.params = params;
  b.bipartite = build_bipartite(ds);
  SimilarityBuildParams sp;
  sp.target_avg_degree = params.target_avg_degree;
  sp.max_degree_cap = params.max_degree_cap;
  sp.exact_count_cutoff = params.exact_count_cutoff;
  sp.degree_sample_nodes = params.degree_sample_nodes;
  sp.sample_seed = params.seed;
  b.user_graph = build_similarity_graph(ds, Axis::kUsers, sp);
  b.item_graph = build_similarity_graph(ds, Axis::kItems, sp);
  b.sampled = presample(b.bipartite, params.sample_sizes, params.num_presample_sets, params.seed);
  b.eval_user_lists = capped_eval_lists(b.bipartite, Side::kUser, params.max_eval_neighbors);
  b.eval_item_lists = capped_eval_lists(b.bipartite, Side::kItem, params.max_eval_neighbors);
  return b;
}

}  // namespace mgccf
