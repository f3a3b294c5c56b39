#include "mgccf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "mgccf/errors.hpp"

namespace mgccf {

namespace {

std::vector<std::string> tokenize(const std::string& line, DatasetFormat format) {
  const bool csv = format == DatasetFormat::kCsv ||
                   (format == DatasetFormat::kAuto && line.find(',') != std::string::npos);
  std::vector<std::string> out;
  if (csv) {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      // trim surrounding whitespace
      const auto b = tok.find_first_not_of(" \t\r");
      if (b == std::string::npos) {
        out.emplace_back();
      } else {
        const auto e = tok.find_last_not_of(" \t\r");
        out.push_back(tok.substr(b, e - b + 1));
      }
    }
  } else {
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(std::move(tok));
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

}  // namespace

std::vector<RawPair> parse_interactions(std::istream& in, DatasetFormat format,
                                        const std::string& source_name) {
  std::vector<RawPair> pairs;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    const auto tokens = tokenize(line, format);
    if (tokens.size() < 2 || tokens[0].empty() || tokens[1].empty()) {
      throw ParseError(source_name + ":" + std::to_string(line_no) +
                       ": expected at least user and item fields");
    }
    std::string key = tokens[0] + '\x1f' + tokens[1];
    if (seen.insert(std::move(key)).second) {
      pairs.emplace_back(tokens[0], tokens[1]);
    }
  }
  if (pairs.empty()) {
    throw DatasetError(source_name + ": no interactions found");
  }
  return pairs;
}

std::vector<RawPair> load_interactions(const std::string& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) {
    throw DatasetError("cannot open interaction file: " + path);
  }
  return parse_interactions(in, format, path);
}

IndexedInteractions filter_and_index(const std::vector<RawPair>& raw, int min_interactions) {
  if (min_interactions < 1) {
    throw ConfigError("min_interactions must be >= 1");
  }
  std::vector<char> keep(raw.size(), 1);
  for (;;) {
    std::unordered_map<std::string, int> user_count, item_count;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (!keep[k]) continue;
      ++user_count[raw[k].first];
      ++item_count[raw[k].second];
    }
    bool changed = false;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (!keep[k]) continue;
      if (user_count[raw[k].first] < min_interactions ||
          item_count[raw[k].second] < min_interactions) {
        keep[k] = 0;
        changed = true;
      }
    }
    if (!changed) break;
  }

  IndexedInteractions out;
  std::unordered_map<std::string, int> user_index, item_index;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (!keep[k]) continue;
    auto [uit, unew] = user_index.try_emplace(raw[k].first, out.num_users);
    if (unew) {
      ++out.num_users;
      out.user_ids.push_back(raw[k].first);
    }
    auto [iit, inew] = item_index.try_emplace(raw[k].second, out.num_items);
    if (inew) {
      ++out.num_items;
      out.item_ids.push_back(raw[k].second);
    }
    out.interactions.push_back({uit->second, iit->second});
  }
  if (out.interactions.empty()) {
    throw DatasetError("all interactions removed by the min-interaction filter");
  }
  return out;
}

bool InteractionDataset::observed(int user, int item) const {
  const auto& v = observed_items_[user];
  return std::binary_search(v.begin(), v.end(), item);
}

bool InteractionDataset::in_train(int user, int item) const {
  const auto& v = train_items_[user];
  return std::binary_search(v.begin(), v.end(), item);
}

int InteractionDataset::user_index(const std::string& raw) const {
  auto it = user_index_.find(raw);
  return it == user_index_.end() ? -1 : it->second;
}

int InteractionDataset::item_index(const std::string& raw) const {
  auto it = item_index_.find(raw);
  return it == item_index_.end() ? -1 : it->second;
}

double InteractionDataset::density() const {
  if (num_users == 0 || num_items == 0) return 0.0;
  return static_cast<double>(total_interactions()) /
         (static_cast<double>(num_users) * static_cast<double>(num_items));
}

void InteractionDataset::finalize() {
  train_items_.assign(num_users, {});
  validation_items_.assign(num_users, {});
  test_items_.assign(num_users, {});
  observed_items_.assign(num_users, {});
  for (const auto& x : train) train_items_[x.user].push_back(x.item);
  for (const auto& x : validation) validation_items_[x.user].push_back(x.item);
  for (const auto& x : test) test_items_[x.user].push_back(x.item);
  for (int u = 0; u < num_users; ++u) {
    auto& all = observed_items_[u];
    for (auto* v : {&train_items_[u], &validation_items_[u], &test_items_[u]}) {
      std::sort(v->begin(), v->end());
      all.insert(all.end(), v->begin(), v->end());
    }
    std::sort(all.begin(), all.end());
  }
  user_index_.clear();
  item_index_.clear();
  for (int u = 0; u < num_users; ++u) user_index_[user_ids[u]] = u;
  for (int i = 0; i < num_items; ++i) item_index_[item_ids[i]] = i;
}

InteractionDataset split(const IndexedInteractions& indexed, const SplitRatios& ratios,
                         std::uint64_t seed) {
  if (ratios.train <= 0.0 || ratios.validation <= 0.0 || ratios.test <= 0.0 ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }

  std::vector<std::vector<int>> per_user(indexed.num_users);
  for (const auto& x : indexed.interactions) per_user[x.user].push_back(x.item);

  InteractionDataset ds;
  ds.num_users = indexed.num_users;
  ds.num_items = indexed.num_items;
  ds.user_ids = indexed.user_ids;
  ds.item_ids = indexed.item_ids;

  // 0 = train, 1 = validation, 2 = test; assignment[user] parallel to per_user.
  std::vector<std::vector<char>> assignment(indexed.num_users);
  for (int u = 0; u < indexed.num_users; ++u) {
    auto& items = per_user[u];
    const int n = static_cast<int>(items.size());
    if (n < 3) {
      throw DatasetError("user '" + indexed.user_ids[u] + "' has " + std::to_string(n) +
                         " interactions; need >= 3 to populate all splits");
    }
    Rng user_rng(Rng::mix(seed, 0x51u) ^ Rng::mix(seed, static_cast<std::uint64_t>(u) + 1));
    // Fisher-Yates shuffle of this user's items.
    for (int k = n - 1; k > 0; --k) {
      const int j = static_cast<int>(user_rng.uniform_index(k + 1));
      std::swap(items[k], items[j]);
    }
    const int n_val = std::max(1, static_cast<int>(ratios.validation * n));
    const int n_test = std::max(1, static_cast<int>(ratios.test * n));
    const int n_train = n - n_val - n_test;
    if (n_train < 1) {
      throw DatasetError("split ratios leave user '" + indexed.user_ids[u] +
                         "' without train interactions");
    }
    auto& a = assignment[u];
    a.assign(n, 0);
    for (int k = n_train; k < n_train + n_val; ++k) a[k] = 1;
    for (int k = n_train + n_val; k < n; ++k) a[k] = 2;
  }

  // Force every item to keep at least one train interaction. Donors are taken
  // from the user whose holding split is largest (the move hurts least), ties
  // to the smaller user index.
  std::vector<int> item_train_count(indexed.num_items, 0);
  std::vector<std::vector<std::pair<int, int>>> item_slots(indexed.num_items);  // (user, pos)
  for (int u = 0; u < indexed.num_users; ++u) {
    for (std::size_t k = 0; k < per_user[u].size(); ++k) {
      const int item = per_user[u][k];
      item_slots[item].emplace_back(u, static_cast<int>(k));
      if (assignment[u][k] == 0) ++item_train_count[item];
    }
  }
  std::vector<std::array<int, 3>> split_sizes(indexed.num_users, {0, 0, 0});
  for (int u = 0; u < indexed.num_users; ++u) {
    for (char a : assignment[u]) ++split_sizes[u][static_cast<int>(a)];
  }
  for (int item = 0; item < indexed.num_items; ++item) {
    if (item_train_count[item] > 0) continue;
    int best_user = -1, best_pos = -1, best_size = -1;
    for (const auto& [u, pos] : item_slots[item]) {
      const int donor_split = assignment[u][pos];
      const int size = split_sizes[u][donor_split];
      if (size > best_size) {
        best_size = size;
        best_user = u;
        best_pos = pos;
      }
    }
    const int donor_split = assignment[best_user][best_pos];
    --split_sizes[best_user][donor_split];
    ++split_sizes[best_user][0];
    assignment[best_user][best_pos] = 0;
    ++item_train_count[item];
  }

  for (int u = 0; u < indexed.num_users; ++u) {
    for (std::size_t k = 0; k < per_user[u].size(); ++k) {
      const Interaction x{u, per_user[u][k]};
      switch (assignment[u][k]) {
        case 0: ds.train.push_back(x); break;
        case 1: ds.validation.push_back(x); break;
        default: ds.test.push_back(x); break;
      }
    }
  }
  ds.finalize();
  return ds;
}

std::vector<Triplet> sample_triplets(const InteractionDataset& ds, int batch_size, Rng& rng) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (ds.train.empty()) throw DatasetError("cannot sample triplets from an empty train set");
  std::vector<Triplet> out;
  out.reserve(batch_size);
  const std::uint64_t max_attempts = 1000ull * static_cast<std::uint64_t>(batch_size) + 100000ull;
  std::uint64_t attempts = 0;
  while (static_cast<int>(out.size()) < batch_size) {
    if (++attempts > max_attempts) {
      throw DatasetError("negative sampling stalled: too few unobserved items");
    }
    const auto& pos = ds.train[rng.uniform_index(ds.train.size())];
    // A user who interacted with every item has no negatives; resample.
    if (static_cast<int>(ds.train_items()[pos.user].size() +
                         ds.validation_items()[pos.user].size() +
                         ds.test_items()[pos.user].size()) >= ds.num_items) {
      continue;
    }
    int j;
    do {
      j = static_cast<int>(rng.uniform_index(ds.num_items));
    } while (ds.observed(pos.user, j));
    out.push_back({pos.user, pos.item, j});
  }
  return out;
}

}  // namespace mgccf
