#include "mgccf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mgccf/errors.hpp"
#include "mgccf/tape.hpp"

namespace mgccf {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (early_stop_patience < 1) throw ConfigError("early_stop_patience must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (val_user_sample < 1) throw ConfigError("val_user_sample must be >= 1");
  if (val_cutoff < 1) throw ConfigError("val_cutoff must be >= 1");
}

MultiGccfRanker::MultiGccfRanker(MultiGccfModel& model, const GraphBundle& bundle,
                                 EvalNeighborMode eval_mode)
    : model_(&model), bundle_(&bundle) {
  if (bundle.bipartite.num_users() != model.num_users ||
      bundle.bipartite.num_items() != model.num_items) {
    throw ConfigError("graph bundle and model disagree on node counts");
  }
  if (model.config.use_bipar &&
      bundle.sampled.num_layers() < model.config.num_gcn_layers) {
    throw ConfigError("graph bundle pre-sampled " +
                      std::to_string(bundle.sampled.num_layers()) + " layers but the model has " +
                      std::to_string(model.config.num_gcn_layers));
  }
  if (eval_mode == EvalNeighborMode::kSampledUnion) {
    union_user_lists_ = sampled_union_lists(bundle.sampled, Side::kUser);
    union_item_lists_ = sampled_union_lists(bundle.sampled, Side::kItem);
    eval_source_ = std::make_unique<FullListSource>(union_user_lists_, union_item_lists_);
  } else {
    eval_source_ = std::make_unique<FullListSource>(bundle.eval_user_lists, bundle.eval_item_lists);
  }
  begin_epoch(0);
}

void MultiGccfRanker::begin_epoch(int epoch_index) {
  // Round-robin rotation through the pre-sampled neighbor sets.
  const int set = epoch_index % bundle_->sampled.num_sets();
  train_source_ = std::make_unique<SampledSource>(bundle_->sampled, set);
}

double MultiGccfRanker::batch_loss_and_grads(std::span<const Triplet> batch, Rng& dropout_rng) {
  Tape tape;
  EncodeSources src{train_source_.get(), &bundle_->user_graph, &bundle_->item_graph};
  const ValueId loss = multi_gccf_bpr_loss(tape, *model_, batch, src, true, &dropout_rng);
  tape.backward(loss);
  return tape.scalar(loss);
}

EncodeSources MultiGccfRanker::inference_sources() const {
  return EncodeSources{eval_source_.get(), &bundle_->user_graph, &bundle_->item_graph};
}

Matrix MultiGccfRanker::user_embeddings(std::span<const int> users, bool parallel) const {
  return fused_embed_chunked(*model_, Side::kUser, users, inference_sources(), parallel);
}

Matrix MultiGccfRanker::item_embeddings(bool parallel) const {
  return fused_embed_all(*model_, Side::kItem, inference_sources(), parallel);
}

double BprmfRanker::batch_loss_and_grads(std::span<const Triplet> batch, Rng& /*dropout_rng*/) {
  Tape tape;
  const ValueId loss = bprmf_loss(tape, *model_, batch);
  tape.backward(loss);
  return tape.scalar(loss);
}

Matrix BprmfRanker::user_embeddings(std::span<const int> users, bool /*parallel*/) const {
  return gather_rows(model_->e_user.value, {users.begin(), users.end()});
}

Matrix BprmfRanker::item_embeddings(bool /*parallel*/) const { return model_->e_item.value; }

namespace {

std::vector<int> sample_validation_users(const InteractionDataset& ds, const TrainConfig& cfg) {
  const int n = ds.num_users;
  if (cfg.val_user_sample >= n) {
    std::vector<int> all(n);
    for (int u = 0; u < n; ++u) all[u] = u;
    return all;
  }
  Rng rng(Rng::mix(cfg.seed, 0x7a11da7eull));
  std::vector<char> taken(n, 0);
  std::vector<int> users;
  users.reserve(cfg.val_user_sample);
  while (static_cast<int>(users.size()) < cfg.val_user_sample) {
    const int u = static_cast<int>(rng.uniform_index(n));
    if (!taken[u]) {
      taken[u] = 1;
      users.push_back(u);
    }
  }
  std::sort(users.begin(), users.end());
  return users;
}

struct ParamSnapshot {
  std::vector<Matrix> value, adam_m, adam_v;
  std::vector<std::int64_t> step_count;

  void capture(const std::vector<Parameter*>& params) {
    value.clear();
    adam_m.clear();
    adam_v.clear();
    step_count.clear();
    for (const Parameter* p : params) {
      value.push_back(p->value);
      adam_m.push_back(p->adam_m);
      adam_v.push_back(p->adam_v);
      step_count.push_back(p->step_count);
    }
  }
  void restore(const std::vector<Parameter*>& params) const {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i]->value = value[i];
      params[i]->adam_m = adam_m[i];
      params[i]->adam_v = adam_v[i];
      params[i]->step_count = step_count[i];
    }
  }
  bool empty() const { return value.empty(); }
};

void check_parameters_finite(const std::vector<Parameter*>& params) {
  for (const Parameter* p : params) {
    if (has_nonfinite(p->value)) {
      throw NumericsError("parameter '" + p->name + "' contains non-finite values");
    }
  }
}

void write_progress(std::ostream* out, const EpochLog& log) {
  if (!out) return;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.3f\n", log.epoch, log.mean_loss,
                log.val_recall, log.val_ndcg, log.seconds);
  *out << buf;
  out->flush();
}

}  // namespace

TrainResult train(TrainableRanker& ranker, const InteractionDataset& ds, const TrainConfig& cfg,
                  const std::vector<int>& report_cutoffs, std::ostream* progress) {
  cfg.validate();
  if (ds.train.empty()) throw DatasetError("train set is empty");

  const AdamConfig adam{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};
  const std::vector<int> val_users = sample_validation_users(ds, cfg);
  const auto params = ranker.parameters();

  TrainResult result;
  TrainState& st = result.state;
  ParamSnapshot best;

  const std::size_t triplets_per_epoch = ds.train.size();
  const int n_batches =
      static_cast<int>((triplets_per_epoch + cfg.batch_size - 1) / cfg.batch_size);

  double last_recall = -1.0, last_ndcg = -1.0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    st.epoch = epoch;
    ranker.begin_epoch(epoch - 1);
    Rng triplet_rng(Rng::mix(Rng::mix(cfg.seed, 0x7219ull), static_cast<std::uint64_t>(epoch)));
    Rng dropout_rng(Rng::mix(Rng::mix(cfg.seed, 0xd209ull), static_cast<std::uint64_t>(epoch)));

    double loss_sum = 0.0;
    std::size_t remaining = triplets_per_epoch;
    for (int b = 0; b < n_batches; ++b) {
      const int bs = static_cast<int>(std::min<std::size_t>(cfg.batch_size, remaining));
      remaining -= bs;
      const auto batch = sample_triplets(ds, bs, triplet_rng);
      loss_sum += ranker.batch_loss_and_grads(batch, dropout_rng);
      for (Parameter* p : params) adam_step(*p, adam);
    }
    check_parameters_finite(params);

    bool stop = false;
    if (epoch % cfg.eval_every == 0) {
      const Matrix uvecs = ranker.user_embeddings(val_users, cfg.parallel_eval);
      const Matrix ivecs = ranker.item_embeddings(cfg.parallel_eval);
      const EvalReport rep =
          evaluate(uvecs, ivecs, ds, {cfg.val_cutoff}, val_users, cfg.parallel_eval, nullptr,
                   EvalSplit::kValidation);
      last_recall = rep.recall[0];
      last_ndcg = rep.ndcg[0];
      ++st.validation_evals;
      if (last_recall > st.best_validation_recall) {
        st.best_validation_recall = last_recall;
        st.best_epoch = epoch;
        st.epochs_since_improvement = 0;
        best.capture(params);
      } else {
        ++st.epochs_since_improvement;
        if (st.epochs_since_improvement >= cfg.early_stop_patience) stop = true;
      }
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EpochLog log{epoch, loss_sum / static_cast<double>(triplets_per_epoch), last_recall,
                 last_ndcg, secs};
    st.history.push_back(log);
    write_progress(progress, log);
    if (stop) break;
  }

  if (!best.empty()) best.restore(params);

  {
    std::vector<int> all_users(ds.num_users);
    for (int u = 0; u < ds.num_users; ++u) all_users[u] = u;
    const Matrix uvecs = ranker.user_embeddings(all_users, cfg.parallel_eval);
    const Matrix ivecs = ranker.item_embeddings(cfg.parallel_eval);
    result.final_report = evaluate(uvecs, ivecs, ds,
                                   report_cutoffs.empty() ? std::vector<int>{cfg.val_cutoff}
                                                          : report_cutoffs,
                                   {}, cfg.parallel_eval, nullptr, EvalSplit::kTest);
  }
  return result;
}

void warm_start_from_bprmf(MultiGccfModel& model, const BprmfModel& bprmf) {
  warm_start_from_bprmf(model, bprmf.e_user.value, bprmf.e_item.value);
}

void warm_start_from_bprmf(MultiGccfModel& model, const Matrix& user_emb, const Matrix& item_emb) {
  if (user_emb.cols != model.config.input_dim || item_emb.cols != model.config.input_dim) {
    throw ConfigError("warm start dim " + std::to_string(user_emb.cols) +
                      " does not match input_dim " + std::to_string(model.config.input_dim));
  }
  if (user_emb.rows != model.num_users || item_emb.rows != model.num_items) {
    throw ConfigError("warm start tables do not match the model's node counts");
  }
  model.e_user.value = user_emb;
  model.e_item.value = item_emb;
  for (Parameter* p : {&model.e_user, &model.e_item}) {
    p->frozen = true;
    p->zero_grad();
    p->adam_m = Matrix(p->value.rows, p->value.cols);
    p->adam_v = Matrix(p->value.rows, p->value.cols);
    p->step_count = 0;
  }
}

}  // namespace mgccf
