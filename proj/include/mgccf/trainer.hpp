#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "mgccf/evaluation.hpp"
#include "mgccf/model.hpp"

namespace mgccf {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 1024;
  int max_epochs = 100;
  int early_stop_patience = 5;
  std::uint64_t seed = 42;
  int eval_every = 1;           // epochs between validation evaluations
  int val_user_sample = 2000;   // validation uses min(this, all) users
  int val_cutoff = 20;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool parallel_eval = true;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;   // summed batch losses / triplets per epoch
  double val_recall = -1.0;  // -1 before the first validation evaluation
  double val_ndcg = -1.0;
  double seconds = 0.0;
};

struct TrainState {
  int epoch = 0;
  double best_validation_recall = -1.0;
  int epochs_since_improvement = 0;
  int best_epoch = 0;
  int validation_evals = 0;
  std::vector<EpochLog> history;
};

// One trainable ranking model: Multi-GCCF or the BPRMF baseline. The trainer
// owns the epoch loop; the ranker owns model math and parameter access.
class TrainableRanker {
 public:
  virtual ~TrainableRanker() = default;
  virtual void begin_epoch(int epoch_index) {}
  virtual double batch_loss_and_grads(std::span<const Triplet> batch, Rng& dropout_rng) = 0;
  virtual std::vector<Parameter*> parameters() = 0;
  // Inference-mode embeddings; `users` sorted unique, rows aligned with it.
  virtual Matrix user_embeddings(std::span<const int> users, bool parallel) const = 0;
  virtual Matrix item_embeddings(bool parallel) const = 0;
};

enum class EvalNeighborMode { kFullCapped, kSampledUnion };

class MultiGccfRanker final : public TrainableRanker {
 public:
  MultiGccfRanker(MultiGccfModel& model, const GraphBundle& bundle,
                  EvalNeighborMode eval_mode = EvalNeighborMode::kFullCapped);
  void begin_epoch(int epoch_index) override;
  double batch_loss_and_grads(std::span<const Triplet> batch, Rng& dropout_rng) override;
  std::vector<Parameter*> parameters() override { return model_->parameters(); }
  Matrix user_embeddings(std::span<const int> users, bool parallel) const override;
  Matrix item_embeddings(bool parallel) const override;
  EncodeSources inference_sources() const;

 private:
  MultiGccfModel* model_;
  const GraphBundle* bundle_;
  std::unique_ptr<SampledSource> train_source_;
  std::unique_ptr<FullListSource> eval_source_;
  std::vector<std::vector<int>> union_user_lists_, union_item_lists_;
};

class BprmfRanker final : public TrainableRanker {
 public:
  explicit BprmfRanker(BprmfModel& model) : model_(&model) {}
  double batch_loss_and_grads(std::span<const Triplet> batch, Rng& dropout_rng) override;
  std::vector<Parameter*> parameters() override { return model_->parameters(); }
  Matrix user_embeddings(std::span<const int> users, bool parallel) const override;
  Matrix item_embeddings(bool parallel) const override;

 private:
  BprmfModel* model_;
};

struct TrainResult {
  TrainState state;
  EvalReport final_report;  // test metrics of the best checkpoint
};

// Epoch loop: per epoch ceil(|train|/batch) batches covering |train| sampled
// triplets, Adam steps, validation recall@val_cutoff on a sampled user subset,
// early stopping after `patience` non-improving evaluations. The model is left
// at the best-validation checkpoint. `progress` (when set) receives one CSV
// line per epoch: epoch,mean_loss,val_recall,val_ndcg,seconds.
TrainResult train(TrainableRanker& ranker, const InteractionDataset& ds, const TrainConfig& cfg,
                  const std::vector<int>& report_cutoffs, std::ostream* progress = nullptr);

// Copies BPRMF embeddings into the model's initial embedding tables and
// freezes them; only the GCN weights train afterwards.
void warm_start_from_bprmf(MultiGccfModel& model, const BprmfModel& bprmf);
void warm_start_from_bprmf(MultiGccfModel& model, const Matrix& user_emb, const Matrix& item_emb);

}  // namespace mgccf
