#pragma once

#include <span>
#include <string>
#include <vector>

#include "mgccf/graphs.hpp"
#include "mgccf/optim.hpp"
#include "mgccf/tape.hpp"

namespace mgccf {

enum class FusionMode { kSum, kConcat, kAttention };

std::string to_string(FusionMode m);
FusionMode fusion_from_string(const std::string& s);

struct ModelConfig {
  int input_dim = 512;
  int layer1_dim = 128;
  int output_dim = 64;
  int num_gcn_layers = 2;               // K
  std::vector<int> sample_sizes = {15, 10};
  FusionMode fusion = FusionMode::kSum;
  double dropout_rate = 0.2;
  double lambda_reg = 0.01;  // weight-matrix penalty
  double beta_reg = 0.02;    // fused-embedding penalty
  bool use_bipar = true;
  bool use_mge = true;
  bool use_skip = true;
  int attention_dim = 0;  // 0 -> output_dim

  void validate() const;
  // Bipar-GCN layer widths: dims[0] = input_dim, dims[K] = output_dim,
  // intermediate layers layer1_dim.
  std::vector<int> layer_dims() const;
  int fused_dim() const;  // 3x output under concat (per active branch)
  int active_branches() const;
};

// All learnable tensors of Multi-GCCF. Only the tensors of enabled branches
// exist. User-side and item-side weights are distinct parameters.
struct MultiGccfModel {
  ModelConfig config;
  int num_users = 0;
  int num_items = 0;

  Parameter e_user, e_item;
  struct GcnLayer {
    Parameter W;  // 2*prev_dim x next_dim transformation
    Parameter Q;  // prev_dim x prev_dim aggregation
  };
  std::vector<GcnLayer> user_layers, item_layers;
  Parameter M_user, M_item;  // MGE aggregation, input_dim x output_dim
  Parameter S_user, S_item;  // skip projection, input_dim x output_dim
  Parameter W_a1, W_a2, W_a3, W_as;  // attention

  static MultiGccfModel init(const ModelConfig& cfg, int num_users, int num_items, Rng& rng);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  // The regularized set: every weight matrix, excluding the embedding tables.
  std::vector<Parameter*> weight_matrices();
  Parameter& embeddings(Side side) { return side == Side::kUser ? e_user : e_item; }
  const Parameter& embeddings(Side side) const { return side == Side::kUser ? e_user : e_item; }
};

// Where the encoders read neighborhoods from. Training uses one pre-sampled
// set; inference uses full (capped) lists or the union of sampled sets.
class NeighborSource {
 public:
  virtual ~NeighborSource() = default;
  virtual int max_layer() const = 0;
  virtual void append_neighbors(Side side, int layer, int node, std::vector<int>& out) const = 0;
};

class SampledSource final : public NeighborSource {
 public:
  SampledSource(const SampledNeighborTable& table, int set_index)
      : table_(&table), set_(set_index) {}
  int max_layer() const override { return table_->num_layers(); }
  void append_neighbors(Side side, int layer, int node, std::vector<int>& out) const override {
    for (std::int32_t v : table_->list(side, layer, node, set_)) out.push_back(v);
  }

 private:
  const SampledNeighborTable* table_;
  int set_;
};

class FullListSource final : public NeighborSource {
 public:
  FullListSource(const std::vector<std::vector<int>>& user_lists,
                 const std::vector<std::vector<int>>& item_lists)
      : user_lists_(&user_lists), item_lists_(&item_lists) {}
  int max_layer() const override { return 1 << 20; }  // layer-independent
  void append_neighbors(Side side, int /*layer*/, int node, std::vector<int>& out) const override {
    const auto& lists = side == Side::kUser ? *user_lists_ : *item_lists_;
    out.insert(out.end(), lists[node].begin(), lists[node].end());
  }

 private:
  const std::vector<std::vector<int>>* user_lists_;
  const std::vector<std::vector<int>>* item_lists_;
};

// Graph views consumed by one forward pass.
struct EncodeSources {
  const NeighborSource* bipartite = nullptr;       // required when use_bipar
  const SimilarityGraph* user_graph = nullptr;     // required when use_mge
  const SimilarityGraph* item_graph = nullptr;
  const SimilarityGraph& similarity(Side side) const {
    return side == Side::kUser ? *user_graph : *item_graph;
  }
};

// --- forward passes -----------------------------------------------------------
//
// Each encoder has a recording flavor (builds loss graphs on a Tape) and a
// pure flavor (inference; reentrant, no tape). `targets` must be sorted and
// unique; outputs are row-aligned with it.

ValueId bipar_gcn_encode(Tape& tape, MultiGccfModel& m, Side side, std::span<const int> targets,
                         const NeighborSource& nbrs, bool training, Rng* dropout_rng);
Matrix bipar_gcn_encode(const MultiGccfModel& m, Side side, std::span<const int> targets,
                        const NeighborSource& nbrs);

ValueId mge_encode(Tape& tape, MultiGccfModel& m, Side side, std::span<const int> targets,
                   const SimilarityGraph& graph);
Matrix mge_encode(const MultiGccfModel& m, Side side, std::span<const int> targets,
                  const SimilarityGraph& graph);

ValueId skip_encode(Tape& tape, MultiGccfModel& m, Side side, std::span<const int> targets);
Matrix skip_encode(const MultiGccfModel& m, Side side, std::span<const int> targets);

// Fused final embeddings e* for the given nodes.
ValueId fused_embed(Tape& tape, MultiGccfModel& m, Side side, std::span<const int> targets,
                    const EncodeSources& src, bool training, Rng* dropout_rng);
Matrix fused_embed(const MultiGccfModel& m, Side side, std::span<const int> targets,
                   const EncodeSources& src);

// Fused embeddings for many nodes, inference mode, parallel across row chunks
// (results are written to disjoint rows, so the reduction order is fixed).
// Output rows are aligned with `targets` (sorted unique).
Matrix fused_embed_chunked(const MultiGccfModel& m, Side side, std::span<const int> targets,
                           const EncodeSources& src, bool parallel = true);
Matrix fused_embed_all(const MultiGccfModel& m, Side side, const EncodeSources& src,
                       bool parallel = true);

double score(std::span<const double> fused_user, std::span<const double> fused_item);

// BPR objective over a batch: sum of -log sigmoid(e*_u . e*_i - e*_u . e*_j)
// plus lambda * ||weights||^2 plus beta * batch-row embedding norms. Records
// the full graph on the tape; call tape.backward(loss) to fill grads.
ValueId multi_gccf_bpr_loss(Tape& tape, MultiGccfModel& m, std::span<const Triplet> batch,
                            const EncodeSources& src, bool training, Rng* dropout_rng);

// --- BPRMF baseline -------------------------------------------------------------

struct BprmfModel {
  int dim = 64;
  double lambda_reg = 0.01;
  Parameter e_user, e_item;

  static BprmfModel init(int num_users, int num_items, int dim, double lambda_reg, Rng& rng);
  std::vector<Parameter*> parameters() { return {&e_user, &e_item}; }
};

// Same pairwise term on raw embedding dot products, with L2 on the batch rows.
ValueId bprmf_loss(Tape& tape, BprmfModel& m, std::span<const Triplet> batch);

}  // namespace mgccf
