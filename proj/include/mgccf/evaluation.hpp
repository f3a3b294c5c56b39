#pragma once

#include <span>
#include <vector>

#include "mgccf/dataset.hpp"
#include "mgccf/matrix.hpp"

namespace mgccf {

// Which held-out set counts as relevant. kTest masks train+validation items;
// kValidation (used for early stopping) masks train items only.
enum class EvalSplit { kTest, kValidation };

// Top-k recommendation list for one user. ranked_items excludes the user's
// masked items; ties are broken by ascending item index.
struct RankingResult {
  int user = 0;
  std::vector<int> ranked_items;
  std::vector<int> relevant;  // the user's held-out items, sorted
};

// Ranks the unmasked items of `user` by the given score row (one score per
// item). Returns at most k items.
RankingResult rank_items_from_scores(int user, std::span<const double> scores,
                                     const InteractionDataset& ds, int k,
                                     EvalSplit split = EvalSplit::kTest);

// Scores items with fused embeddings (dot product) and ranks. user_vec is the
// user's fused embedding row.
RankingResult rank_items(int user, std::span<const double> user_vec, const Matrix& item_vecs,
                         const InteractionDataset& ds, int k,
                         EvalSplit split = EvalSplit::kTest);

// |relevant n top-k| / |relevant|.
double recall_at_k(const RankingResult& result, int k);

// DCG@k with binary relevance over the ranked list, normalized by the DCG of
// the ideal list placing min(k, |relevant|) relevant items first.
double ndcg_at_k(const RankingResult& result, int k);

struct EvalReport {
  std::vector<int> cutoffs;
  std::vector<double> recall;  // parallel to cutoffs, mean over evaluated users
  std::vector<double> ndcg;
  int users_evaluated = 0;
  int users_skipped = 0;  // empty test set

  double recall_at(int k) const;
  double ndcg_at(int k) const;
};

// Mean per-user metrics over users with nonempty test sets. When `users` is
// empty, all users are evaluated and user_vecs must have num_users rows;
// otherwise user_vecs rows are aligned with `users`. Per-user values (rows
// aligned with evaluated users, cutoffs-major: recall then ndcg) are written
// to per_user when non-null.
EvalReport evaluate(const Matrix& user_vecs, const Matrix& item_vecs,
                    const InteractionDataset& ds, const std::vector<int>& cutoffs,
                    std::span<const int> users = {}, bool parallel = true,
                    std::vector<std::vector<double>>* per_user = nullptr,
                    EvalSplit split = EvalSplit::kTest);

}  // namespace mgccf
