// Compares the OpenMP kernels against their serial references: wall time and a
// bitwise equality check, since the parallel versions must not change results.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "mgccf/dataset.hpp"
#include "mgccf/graphs.hpp"
#include "mgccf/matrix.hpp"
#include "mgccf/rng.hpp"

using namespace mgccf;

namespace {

double time_ms(const std::function<void()>& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

InteractionDataset synthetic_dataset(int num_users, int num_items, double p, std::uint64_t seed) {
  Rng rng(seed);
  IndexedInteractions idx;
  idx.num_users = num_users;
  idx.num_items = num_items;
  for (int u = 0; u < num_users; ++u) idx.user_ids.push_back("u" + std::to_string(u));
  for (int i = 0; i < num_items; ++i) idx.item_ids.push_back("i" + std::to_string(i));
  for (int u = 0; u < num_users; ++u) {
    int added = 0;
    for (int i = 0; i < num_items; ++i) {
      if (rng.uniform() < p) {
        idx.interactions.push_back({u, i});
        ++added;
      }
    }
    while (added < 3) {  // split needs >= 3 per user
      const int i = static_cast<int>(rng.uniform_index(num_items));
      idx.interactions.push_back({u, i});
      ++added;
    }
  }
  // dedup
  std::sort(idx.interactions.begin(), idx.interactions.end(),
            [](const Interaction& a, const Interaction& b) {
              return a.user != b.user ? a.user < b.user : a.item < b.item;
            });
  idx.interactions.erase(std::unique(idx.interactions.begin(), idx.interactions.end()),
                         idx.interactions.end());
  return split(idx, SplitRatios{}, seed);
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-28s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   %s\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, equal ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());

  {
    Rng rng(7);
    const Matrix a = xavier_init(384, 512, rng);
    const Matrix b = xavier_init(512, 256, rng);
    Matrix serial_out, parallel_out;
    const double ts = time_ms([&] { serial_out = matmul_serial(a, b); });
    const double tp = time_ms([&] { parallel_out = matmul(a, b); });
    report("matmul 384x512x256", ts, tp, serial_out.data == parallel_out.data);
  }

  {
    const InteractionDataset ds = synthetic_dataset(1500, 900, 0.02, 11);
    SimilarityBuildParams params;
    params.target_avg_degree = 10;
    SimilarityGraph gs, gp;
    const double ts = time_ms([&] { gs = build_similarity_graph_serial(ds, Axis::kUsers, params); },
                              1);
    const double tp = time_ms([&] { gp = build_similarity_graph(ds, Axis::kUsers, params); }, 1);
    report("similarity graph 1500u", ts, tp,
           gs.neighbors == gp.neighbors && gs.threshold == gp.threshold);
  }

  {
    const InteractionDataset ds = synthetic_dataset(1500, 900, 0.02, 11);
    const BipartiteGraph graph = build_bipartite(ds);
    SampledNeighborTable ts_out, tp_out;
    omp_set_num_threads(1);
    const double ts = time_ms([&] { ts_out = presample(graph, {15, 10}, 30, 5); }, 1);
    omp_set_num_threads(omp_get_num_procs());
    const double tp = time_ms([&] { tp_out = presample(graph, {15, 10}, 30, 5); }, 1);
    const bool equal = ts_out.storage(Side::kUser) == tp_out.storage(Side::kUser) &&
                       ts_out.storage(Side::kItem) == tp_out.storage(Side::kItem);
    report("presample 30 sets", ts, tp, equal);
  }

  return 0;
}
