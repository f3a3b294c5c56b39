#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mgccf/dataset.hpp"
#include "mgccf/errors.hpp"
#include "mgccf/serialize.hpp"
#include "oracles.hpp"

using namespace mgccf;

namespace {

std::vector<RawPair> parse_text(const std::string& text,
                                DatasetFormat format = DatasetFormat::kAuto) {
  std::istringstream in(text);
  return parse_interactions(in, format, "<test>");
}

// Recount oracle: per-entity totals computed from scratch.
std::pair<std::map<std::string, int>, std::map<std::string, int>> recount(
    const std::vector<RawPair>& pairs) {
  std::map<std::string, int> users, items;
  for (const auto& [u, i] : pairs) {
    ++users[u];
    ++items[i];
  }
  return {users, items};
}

std::vector<RawPair> surviving_pairs(const IndexedInteractions& idx) {
  std::vector<RawPair> out;
  for (const auto& x : idx.interactions) {
    out.emplace_back(idx.user_ids[x.user], idx.item_ids[x.item]);
  }
  return out;
}

}  // namespace

TEST_CASE("duplicate interactions collapse to one") {
  const auto pairs = parse_text("u1 i1\nu1 i1\nu2 i3\n");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == RawPair{"u1", "i1"});
  CHECK(pairs[1] == RawPair{"u2", "i3"});
}

TEST_CASE("missing item field is a parse error naming the line") {
  CHECK_THROWS_WITH_AS(parse_text("u1\n"), doctest::Contains(":1"), ParseError);
  CHECK_THROWS_WITH_AS(parse_text("u1 i1\nu9\n"), doctest::Contains(":2"), ParseError);
}

TEST_CASE("empty input is an empty-dataset error") {
  CHECK_THROWS_AS(parse_text(""), DatasetError);
  CHECK_THROWS_AS(parse_text("# only a comment\n"), DatasetError);
}

TEST_CASE("comments, ratings and timestamps are accepted and discarded") {
  const auto pairs = parse_text("# header\nu1 i1 5.0 123456\nu2,i2,3.5\n");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == RawPair{"u1", "i1"});
  CHECK(pairs[1] == RawPair{"u2", "i2"});
}

TEST_CASE("csv format with explicit flag") {
  const auto pairs = parse_text("a,b\nc,d\n", DatasetFormat::kCsv);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[1] == RawPair{"c", "d"});
}

TEST_CASE("load_interactions fails cleanly on a missing file") {
  CHECK_THROWS_AS(load_interactions("/nonexistent/path.txt"), DatasetError);
}

TEST_CASE("filter removes low-count entities and cascades to a fixed point") {
  std::vector<RawPair> raw;
  // users a (12 items), b (11 items), c (2 items); every item unique except
  // the ones that keep a and b above threshold
  for (int i = 0; i < 12; ++i) raw.emplace_back("a", "shared" + std::to_string(i));
  for (int i = 0; i < 11; ++i) raw.emplace_back("b", "shared" + std::to_string(i));
  raw.emplace_back("c", "shared0");
  raw.emplace_back("c", "shared1");
  const auto idx = filter_and_index(raw, 10);
  CHECK(idx.num_users == 2);  // c removed
  const auto [users, items] = recount(surviving_pairs(idx));
  for (const auto& [u, n] : users) CHECK(n >= 10);
  for (const auto& [i, n] : items) CHECK(n >= 10);
}

TEST_CASE("min_interactions = 1 keeps everything") {
  const auto raw = parse_text("u1 i1\nu2 i1\nu3 i2\n");
  const auto idx = filter_and_index(raw, 1);
  CHECK(idx.interactions.size() == 3);
  CHECK(idx.num_users == 3);
  CHECK(idx.num_items == 2);
}

TEST_CASE("removal chains cascade and can empty the dataset") {
  // u3's removal drops iC below 2, whose removal drops u2 below 2, and so on
  // until nothing is left.
  std::vector<RawPair> raw{{"u1", "iA"}, {"u1", "iB"}, {"u2", "iA"},
                           {"u2", "iC"}, {"u3", "iC"}};
  CHECK_THROWS_AS(filter_and_index(raw, 2), DatasetError);
}

TEST_CASE("adversarial cascade verified by brute-force recount") {
  // Random data plus a fragile chain; after filtering, a full recount must
  // show every surviving entity at or above the threshold, and re-filtering
  // must be a no-op (fixed point).
  Rng rng(404);
  std::vector<RawPair> raw;
  for (int u = 0; u < 30; ++u) {
    const int n = 1 + static_cast<int>(rng.uniform_index(8));
    for (int k = 0; k < n; ++k) {
      raw.emplace_back("u" + std::to_string(u),
                       "i" + std::to_string(rng.uniform_index(25)));
    }
  }
  const int min_interactions = 3;
  const auto idx = filter_and_index(raw, min_interactions);
  const auto pairs = surviving_pairs(idx);
  const auto [users, items] = recount(pairs);
  for (const auto& [u, n] : users) CHECK(n >= min_interactions);
  for (const auto& [i, n] : items) CHECK(n >= min_interactions);
  const auto again = filter_and_index(pairs, min_interactions);
  CHECK(again.interactions.size() == idx.interactions.size());
}

namespace {

IndexedInteractions uniform_indexed(int num_users, int items_per_user) {
  IndexedInteractions idx;
  idx.num_users = num_users;
  idx.num_items = items_per_user;
  for (int u = 0; u < num_users; ++u) idx.user_ids.push_back("u" + std::to_string(u));
  for (int i = 0; i < items_per_user; ++i) idx.item_ids.push_back("i" + std::to_string(i));
  for (int u = 0; u < num_users; ++u) {
    for (int i = 0; i < items_per_user; ++i) idx.interactions.push_back({u, i});
  }
  return idx;
}

}  // namespace

TEST_CASE("per-user split of 10 items at 0.8/0.1/0.1 is exactly 8/1/1") {
  const auto idx = uniform_indexed(4, 10);
  const InteractionDataset ds = split(idx, SplitRatios{0.8, 0.1, 0.1}, 7);
  for (int u = 0; u < ds.num_users; ++u) {
    CHECK(ds.train_items()[u].size() == 8);
    CHECK(ds.validation_items()[u].size() == 1);
    CHECK(ds.test_items()[u].size() == 1);
  }
}

TEST_CASE("split is deterministic under the seed") {
  const auto idx = uniform_indexed(6, 12);
  const InteractionDataset a = split(idx, SplitRatios{}, 99);
  const InteractionDataset b = split(idx, SplitRatios{}, 99);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);
  const InteractionDataset c = split(idx, SplitRatios{}, 100);
  CHECK(a.train != c.train);  // different seed reshuffles
}

TEST_CASE("split partitions the interactions exactly") {
  testing::BlockDataset block = testing::make_block_dataset(40, 60, 2, 0.5, 0.05, 31, 5);
  const auto& ds = block.ds;
  CHECK(ds.train.size() + ds.validation.size() + ds.test.size() == ds.total_interactions());
  // pairwise disjoint
  for (const auto& x : ds.validation) {
    CHECK_FALSE(ds.in_train(x.user, x.item));
  }
  for (const auto& x : ds.test) {
    CHECK_FALSE(ds.in_train(x.user, x.item));
    const auto& val = ds.validation_items()[x.user];
    CHECK_FALSE(std::binary_search(val.begin(), val.end(), x.item));
  }
}

TEST_CASE("no cold-start entities: every user and item has a train interaction") {
  testing::BlockDataset block = testing::make_block_dataset(50, 70, 2, 0.4, 0.02, 17, 4);
  const auto& ds = block.ds;
  std::vector<int> item_train(ds.num_items, 0);
  for (int u = 0; u < ds.num_users; ++u) {
    CHECK(!ds.train_items()[u].empty());
    for (int i : ds.train_items()[u]) ++item_train[i];
  }
  for (int i = 0; i < ds.num_items; ++i) CHECK(item_train[i] >= 1);
}

TEST_CASE("an item seen by a single user is forced into train") {
  IndexedInteractions idx;
  idx.num_users = 2;
  idx.num_items = 5;
  idx.user_ids = {"a", "b"};
  idx.item_ids = {"w", "x", "y", "z", "rare"};
  // "rare" appears only in user a's history
  for (int i = 0; i < 5; ++i) idx.interactions.push_back({0, i});
  for (int i = 0; i < 4; ++i) idx.interactions.push_back({1, i});
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const InteractionDataset ds = split(idx, SplitRatios{}, seed);
    CHECK(ds.in_train(0, 4));
  }
}

TEST_CASE("users with fewer than 3 interactions cannot be split") {
  IndexedInteractions idx;
  idx.num_users = 1;
  idx.num_items = 2;
  idx.user_ids = {"a"};
  idx.item_ids = {"x", "y"};
  idx.interactions = {{0, 0}, {0, 1}};
  CHECK_THROWS_AS(split(idx, SplitRatios{}, 1), DatasetError);
}

TEST_CASE("forced negative: the only unobserved item is always sampled") {
  IndexedInteractions idx;
  idx.num_users = 1;
  idx.num_items = 3;
  idx.user_ids = {"a"};
  idx.item_ids = {"x", "y", "z"};
  idx.interactions = {{0, 0}, {0, 1}};
  InteractionDataset ds;
  ds.num_users = 1;
  ds.num_items = 3;
  ds.user_ids = idx.user_ids;
  ds.item_ids = idx.item_ids;
  ds.train = {{0, 0}, {0, 1}};
  ds.finalize();
  Rng rng(5);
  for (const Triplet& t : sample_triplets(ds, 64, rng)) {
    CHECK(t.u == 0);
    CHECK(t.j == 2);
    CHECK((t.i == 0 || t.i == 1));
  }
}

TEST_CASE("a full batch satisfies the triplet invariants") {
  testing::BlockDataset block = testing::make_block_dataset(40, 60, 2, 0.5, 0.05, 77, 5);
  const auto& ds = block.ds;
  Rng rng(8);
  const auto batch = sample_triplets(ds, 1024, rng);
  REQUIRE(batch.size() == 1024);
  for (const Triplet& t : batch) {
    CHECK(ds.in_train(t.u, t.i));
    CHECK_FALSE(ds.observed(t.u, t.j));
  }
}

TEST_CASE("negative sampling is uniform over the unobserved items") {
  // one user, 2 of 100 items positive: the 98 negatives should be hit
  // uniformly within a chi-squared bound
  InteractionDataset ds;
  ds.num_users = 1;
  ds.num_items = 100;
  ds.user_ids = {"a"};
  for (int i = 0; i < 100; ++i) ds.item_ids.push_back("i" + std::to_string(i));
  ds.train = {{0, 11}, {0, 47}};
  ds.finalize();
  Rng rng(1234);
  std::vector<int> counts(100, 0);
  const int draws = 100000;
  for (int k = 0; k < draws; k += 1000) {
    for (const Triplet& t : sample_triplets(ds, 1000, rng)) ++counts[t.j];
  }
  CHECK(counts[11] == 0);
  CHECK(counts[47] == 0);
  const double expected = draws / 98.0;
  double chi2 = 0.0;
  for (int i = 0; i < 100; ++i) {
    if (i == 11 || i == 47) continue;
    const double d = counts[i] - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < testing::chi2_bound(97));
}

TEST_CASE("a user observing every item stalls the sampler") {
  InteractionDataset ds;
  ds.num_users = 1;
  ds.num_items = 3;
  ds.user_ids = {"a"};
  ds.item_ids = {"x", "y", "z"};
  ds.train = {{0, 0}, {0, 1}, {0, 2}};
  ds.finalize();
  Rng rng(5);
  CHECK_THROWS_AS(sample_triplets(ds, 4, rng), DatasetError);
}

TEST_CASE("dataset snapshots round-trip and are byte-identical across runs") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mgccf_ds_test";
  fs::create_directories(dir);
  const auto idx = uniform_indexed(5, 8);

  const InteractionDataset a = split(idx, SplitRatios{}, 3);
  const InteractionDataset b = split(idx, SplitRatios{}, 3);
  const auto pa = (dir / "a.mgds").string();
  const auto pb = (dir / "b.mgds").string();
  save_dataset(a, pa);
  save_dataset(b, pb);
  CHECK(fnv1a_file(pa) == fnv1a_file(pb));

  const InteractionDataset back = load_dataset(pa);
  CHECK(back.num_users == a.num_users);
  CHECK(back.num_items == a.num_items);
  CHECK(back.train == a.train);
  CHECK(back.validation == a.validation);
  CHECK(back.test == a.test);
  CHECK(back.user_ids == a.user_ids);
  CHECK(back.item_index("i3") == a.item_index("i3"));
  fs::remove_all(dir);
}

TEST_CASE("density matches the statistics formula") {
  const auto idx = uniform_indexed(4, 10);  // 40 of 40 cells
  const InteractionDataset ds = split(idx, SplitRatios{}, 3);
  CHECK(ds.density() == doctest::Approx(1.0));
}
