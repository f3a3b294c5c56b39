#include "mgccf/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "mgccf/errors.hpp"

namespace mgccf {

RankingResult rank_items_from_scores(int user, std::span<const double> scores,
                                     const InteractionDataset& ds, int k, EvalSplit split) {
  if (k < 1) throw ConfigError("cutoff k must be >= 1");
  const auto& train = ds.train_items()[user];
  const auto& val = ds.validation_items()[user];
  const bool mask_val = split == EvalSplit::kTest;
  RankingResult r;
  r.user = user;
  r.relevant = split == EvalSplit::kTest ? ds.test_items()[user] : ds.validation_items()[user];

  std::vector<int> eligible;
  eligible.reserve(scores.size());
  for (int item = 0; item < static_cast<int>(scores.size()); ++item) {
    if (std::binary_search(train.begin(), train.end(), item)) continue;
    if (mask_val && std::binary_search(val.begin(), val.end(), item)) continue;
    eligible.push_back(item);
  }
  const int top = std::min<int>(k, static_cast<int>(eligible.size()));
  // score descending, item index ascending on ties
  std::partial_sort(eligible.begin(), eligible.begin() + top, eligible.end(),
                    [&](int a, int b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  eligible.resize(top);
  r.ranked_items = std::move(eligible);
  return r;
}

RankingResult rank_items(int user, std::span<const double> user_vec, const Matrix& item_vecs,
                         const InteractionDataset& ds, int k, EvalSplit split) {
  if (static_cast<int>(user_vec.size()) != item_vecs.cols) {
    throw DimensionError("rank_items: user dim " + std::to_string(user_vec.size()) +
                         " vs item dim " + std::to_string(item_vecs.cols));
  }
  std::vector<double> scores(item_vecs.rows);
  for (int item = 0; item < item_vecs.rows; ++item) {
    const double* iv = item_vecs.row(item);
    double acc = 0.0;
    for (int j = 0; j < item_vecs.cols; ++j) acc += user_vec[j] * iv[j];
    scores[item] = acc;
  }
  return rank_items_from_scores(user, scores, ds, k, split);
}

double recall_at_k(const RankingResult& result, int k) {
  if (k < 1) throw ConfigError("cutoff k must be >= 1");
  if (result.relevant.empty()) return 0.0;
  const int top = std::min<int>(k, static_cast<int>(result.ranked_items.size()));
  int hits = 0;
  for (int n = 0; n < top; ++n) {
    if (std::binary_search(result.relevant.begin(), result.relevant.end(),
                           result.ranked_items[n])) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(result.relevant.size());
}

double ndcg_at_k(const RankingResult& result, int k) {
  if (k < 1) throw ConfigError("cutoff k must be >= 1");
  if (result.relevant.empty()) return 0.0;
  const int top = std::min<int>(k, static_cast<int>(result.ranked_items.size()));
  double dcg = 0.0;
  for (int n = 0; n < top; ++n) {
    if (std::binary_search(result.relevant.begin(), result.relevant.end(),
                           result.ranked_items[n])) {
      dcg += 1.0 / std::log2(static_cast<double>(n) + 2.0);
    }
  }
  const int ideal = std::min<int>(k, static_cast<int>(result.relevant.size()));
  double idcg = 0.0;
  for (int n = 0; n < ideal; ++n) idcg += 1.0 / std::log2(static_cast<double>(n) + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double EvalReport::recall_at(int k) const {
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] == k) return recall[i];
  }
  throw ConfigError("cutoff " + std::to_string(k) + " not in report");
}

double EvalReport::ndcg_at(int k) const {
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] == k) return ndcg[i];
  }
  throw ConfigError("cutoff " + std::to_string(k) + " not in report");
}

EvalReport evaluate(const Matrix& user_vecs, const Matrix& item_vecs,
                    const InteractionDataset& ds, const std::vector<int>& cutoffs,
                    std::span<const int> users, bool parallel,
                    std::vector<std::vector<double>>* per_user, EvalSplit split) {
  if (cutoffs.empty()) throw ConfigError("evaluate needs at least one cutoff");
  std::vector<int> all_users;
  if (users.empty()) {
    if (user_vecs.rows != ds.num_users) {
      throw DimensionError("evaluate: user matrix has " + std::to_string(user_vecs.rows) +
                           " rows for " + std::to_string(ds.num_users) + " users");
    }
    all_users.resize(ds.num_users);
    for (int u = 0; u < ds.num_users; ++u) all_users[u] = u;
    users = all_users;
  } else if (static_cast<int>(users.size()) != user_vecs.rows) {
    throw DimensionError("evaluate: user list and user matrix disagree");
  }
  const int max_k = *std::max_element(cutoffs.begin(), cutoffs.end());

  EvalReport report;
  report.cutoffs = cutoffs;
  report.recall.assign(cutoffs.size(), 0.0);
  report.ndcg.assign(cutoffs.size(), 0.0);

  const int n = static_cast<int>(users.size());
  // metrics[row][c] = (recall, ndcg) pairs; -1 marks a skipped user
  std::vector<std::vector<double>> metrics(n);
  const auto& held_out =
      split == EvalSplit::kTest ? ds.test_items() : ds.validation_items();
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (int row = 0; row < n; ++row) {
    const int u = users[row];
    if (held_out[u].empty()) continue;
    const std::span<const double> uv{user_vecs.row(row), static_cast<std::size_t>(user_vecs.cols)};
    const RankingResult r = rank_items(u, uv, item_vecs, ds, max_k, split);
    auto& m = metrics[row];
    m.reserve(cutoffs.size() * 2);
    for (int k : cutoffs) m.push_back(recall_at_k(r, k));
    for (int k : cutoffs) m.push_back(ndcg_at_k(r, k));
  }
  // deterministic reduction in user order
  for (int row = 0; row < n; ++row) {
    if (metrics[row].empty()) {
      ++report.users_skipped;
      continue;
    }
    ++report.users_evaluated;
    for (std::size_t c = 0; c < cutoffs.size(); ++c) {
      report.recall[c] += metrics[row][c];
      report.ndcg[c] += metrics[row][cutoffs.size() + c];
    }
    if (per_user) per_user->push_back(metrics[row]);
  }
  if (report.users_evaluated > 0) {
    for (std::size_t c = 0; c < cutoffs.size(); ++c) {
      report.recall[c] /= report.users_evaluated;
      report.ndcg[c] /= report.users_evaluated;
    }
  }
  return report;
}

}  // namespace mgccf
