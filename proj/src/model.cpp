#include "mgccf/model.hpp"

#include <algorithm>
#include <cmath>

#include "mgccf/errors.hpp"

namespace mgccf {

std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::kSum: return "sum";
    case FusionMode::kConcat: return "concat";
    case FusionMode::kAttention: return "attention";
  }
  return "sum";
}

FusionMode fusion_from_string(const std::string& s) {
  if (s == "sum") return FusionMode::kSum;
  if (s == "concat") return FusionMode::kConcat;
  if (s == "attention") return FusionMode::kAttention;
  throw ConfigError("unknown fusion mode '" + s + "' (expected sum|concat|attention)");
}

void ModelConfig::validate() const {
  if (input_dim < 1 || layer1_dim < 1 || output_dim < 1) {
    throw ConfigError("embedding dims must be >= 1");
  }
  if (num_gcn_layers < 1) throw ConfigError("num_gcn_layers must be >= 1");
  if (use_bipar && static_cast<int>(sample_sizes.size()) != num_gcn_layers) {
    throw ConfigError("sample_sizes must have one entry per GCN layer (" +
                      std::to_string(num_gcn_layers) + ")");
  }
  for (int s : sample_sizes) {
    if (s < 1) throw ConfigError("sample sizes must be >= 1");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("dropout_rate must be in [0,1)");
  }
  if (lambda_reg < 0.0 || beta_reg < 0.0) throw ConfigError("regularizers must be >= 0");
  if (!use_bipar && !use_mge && !use_skip) {
    throw ConfigError("at least one embedding branch must be enabled");
  }
}

std::vector<int> ModelConfig::layer_dims() const {
  std::vector<int> dims(num_gcn_layers + 1, layer1_dim);
  dims[0] = input_dim;
  dims[num_gcn_layers] = output_dim;
  return dims;
}

int ModelConfig::active_branches() const {
  return (use_bipar ? 1 : 0) + (use_mge ? 1 : 0) + (use_skip ? 1 : 0);
}

int ModelConfig::fused_dim() const {
  return fusion == FusionMode::kConcat ? active_branches() * output_dim : output_dim;
}

MultiGccfModel MultiGccfModel::init(const ModelConfig& cfg, int num_users, int num_items,
                                    Rng& rng) {
  cfg.validate();
  MultiGccfModel m;
  m.config = cfg;
  m.num_users = num_users;
  m.num_items = num_items;
  m.e_user = Parameter("e_user", xavier_init(num_users, cfg.input_dim, rng));
  m.e_item = Parameter("e_item", xavier_init(num_items, cfg.input_dim, rng));
  if (cfg.use_bipar) {
    const auto dims = cfg.layer_dims();
    for (int k = 1; k <= cfg.num_gcn_layers; ++k) {
      const int prev = dims[k - 1], next = dims[k];
      m.user_layers.push_back({Parameter("W_u" + std::to_string(k), xavier_init(2 * prev, next, rng)),
                               Parameter("Q_u" + std::to_string(k), xavier_init(prev, prev, rng))});
      m.item_layers.push_back({Parameter("W_v" + std::to_string(k), xavier_init(2 * prev, next, rng)),
                               Parameter("Q_v" + std::to_string(k), xavier_init(prev, prev, rng))});
    }
  }
  if (cfg.use_mge) {
    m.M_user = Parameter("M_u", xavier_init(cfg.input_dim, cfg.output_dim, rng));
    m.M_item = Parameter("M_v", xavier_init(cfg.input_dim, cfg.output_dim, rng));
  }
  if (cfg.use_skip) {
    m.S_user = Parameter("S_u", xavier_init(cfg.input_dim, cfg.output_dim, rng));
    m.S_item = Parameter("S_v", xavier_init(cfg.input_dim, cfg.output_dim, rng));
  }
  if (cfg.fusion == FusionMode::kAttention && cfg.active_branches() > 1) {
    const int da = cfg.attention_dim > 0 ? cfg.attention_dim : cfg.output_dim;
    m.W_a1 = Parameter("W_a1", xavier_init(cfg.output_dim, da, rng));
    m.W_a2 = Parameter("W_a2", xavier_init(cfg.output_dim, da, rng));
    m.W_a3 = Parameter("W_a3", xavier_init(cfg.output_dim, da, rng));
    m.W_as = Parameter("W_as", xavier_init(da, 3, rng));
  }
  return m;
}

std::vector<Parameter*> MultiGccfModel::parameters() {
  std::vector<Parameter*> out{&e_user, &e_item};
  for (auto& l : user_layers) {
    out.push_back(&l.W);
    out.push_back(&l.Q);
  }
  for (auto& l : item_layers) {
    out.push_back(&l.W);
    out.push_back(&l.Q);
  }
  if (config.use_mge) {
    out.push_back(&M_user);
    out.push_back(&M_item);
  }
  if (config.use_skip) {
    out.push_back(&S_user);
    out.push_back(&S_item);
  }
  if (config.fusion == FusionMode::kAttention && config.active_branches() > 1) {
    out.push_back(&W_a1);
    out.push_back(&W_a2);
    out.push_back(&W_a3);
    out.push_back(&W_as);
  }
  return out;
}

std::vector<const Parameter*> MultiGccfModel::parameters() const {
  auto mut = const_cast<MultiGccfModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<Parameter*> MultiGccfModel::weight_matrices() {
  auto out = parameters();
  out.erase(std::remove_if(out.begin(), out.end(),
                           [this](Parameter* p) { return p == &e_user || p == &e_item; }),
            out.end());
  return out;
}

namespace {

Side depth_side(Side root, int depth) { return depth % 2 == 0 ? root : other_side(root); }

// --- computation contexts ---------------------------------------------------
//
// The encoder math is written once, templated over a context: TapeCtx records
// ops for the backward pass, EvalCtx computes plain matrices (reentrant, used
// for ranking).

struct TapeCtx {
  using Ref = ValueId;
  using Model = MultiGccfModel;
  Tape& tape;
  bool training;
  double dropout_rate;
  Rng* dropout_rng;

  Ref param_gather(Parameter& p, std::vector<int> idx) {
    return tape.gather_rows(tape.param(p), std::move(idx));
  }
  Ref matmul_param(Ref a, Parameter& p) { return tape.matmul(a, tape.param(p)); }
  Ref gather_rows(Ref a, std::vector<int> idx) { return tape.gather_rows(a, std::move(idx)); }
  Ref segment_mean(Ref a, std::vector<int> offs) { return tape.segment_mean(a, std::move(offs)); }
  Ref segment_sum(Ref a, std::vector<int> offs) { return tape.segment_sum(a, std::move(offs)); }
  Ref tanh(Ref a) { return tape.tanh(a); }
  Ref add(Ref a, Ref b) { return tape.add(a, b); }
  Ref concat_cols(Ref a, Ref b) { return tape.concat_cols(a, b); }
  Ref softmax_rows(Ref a) { return tape.softmax_rows(a); }
  Ref slice_cols(Ref a, int b, int e) { return tape.slice_cols(a, b, e); }
  Ref rowwise_scale(Ref a, Ref w) { return tape.rowwise_scale(a, w); }
  Ref dropout(Ref a) {
    if (!training || dropout_rate == 0.0) return a;
    return tape.dropout(a, dropout_rate, *dropout_rng, true);
  }
};

struct EvalCtx {
  using Ref = Matrix;
  using Model = const MultiGccfModel;

  Ref param_gather(const Parameter& p, std::vector<int> idx) {
    return mgccf::gather_rows(p.value, idx);
  }
  Ref matmul_param(const Ref& a, const Parameter& p) { return mgccf::matmul(a, p.value); }
  Ref gather_rows(const Ref& a, const std::vector<int>& idx) {
    return mgccf::gather_rows(a, idx);
  }
  Ref segment_mean(const Ref& a, const std::vector<int>& offs) {
    return mgccf::segment_mean(a, offs);
  }
  Ref segment_sum(const Ref& a, const std::vector<int>& offs) {
    return mgccf::segment_sum(a, offs);
  }
  Ref tanh(const Ref& a) { return tanh_mat(a); }
  Ref add(const Ref& a, const Ref& b) { return mgccf::add(a, b); }
  Ref concat_cols(const Ref& a, const Ref& b) { return mgccf::concat_cols(a, b); }
  Ref softmax_rows(const Ref& a) { return mgccf::softmax_rows(a); }
  Ref slice_cols(const Ref& a, int b, int e) { return mgccf::slice_cols(a, b, e); }
  Ref rowwise_scale(const Ref& a, const Ref& w) { return mgccf::rowwise_scale(a, w); }
  Ref dropout(const Ref& a) { return a; }
};

// Sampled (or full) neighborhood tree rooted at the targets: one distinct node
// list per depth plus, per depth, the flattened child positions into the next
// level and their segment offsets. Children are sorted within each segment so
// aggregation order cannot depend on the stored list order.
struct LevelPlan {
  std::vector<std::vector<int>> nodes;      // depth 0..K
  std::vector<std::vector<int>> child_pos;  // depth 0..K-1
  std::vector<std::vector<int>> offsets;    // depth 0..K-1
};

LevelPlan build_plan(Side side, std::span<const int> targets, const NeighborSource& nbrs, int K) {
  LevelPlan plan;
  plan.nodes.resize(K + 1);
  plan.nodes[0].assign(targets.begin(), targets.end());
  plan.child_pos.resize(K);
  plan.offsets.resize(K);
  std::vector<int> buf;
  for (int d = 0; d < K; ++d) {
    const Side s = depth_side(side, d);
    auto& offs = plan.offsets[d];
    offs.reserve(plan.nodes[d].size() + 1);
    offs.push_back(0);
    std::vector<int> flat;
    for (int node : plan.nodes[d]) {
      buf.clear();
      nbrs.append_neighbors(s, d + 1, node, buf);
      std::sort(buf.begin(), buf.end());
      flat.insert(flat.end(), buf.begin(), buf.end());
      offs.push_back(static_cast<int>(flat.size()));
    }
    auto& nxt = plan.nodes[d + 1];
    nxt = flat;
    std::sort(nxt.begin(), nxt.end());
    nxt.erase(std::unique(nxt.begin(), nxt.end()), nxt.end());
    auto& pos = plan.child_pos[d];
    pos.resize(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
      pos[i] = static_cast<int>(std::lower_bound(nxt.begin(), nxt.end(), flat[i]) - nxt.begin());
    }
  }
  return plan;
}

template <class Ctx>
typename Ctx::Ref bipar_encode_impl(Ctx& ctx, typename Ctx::Model& m, Side side,
                                    std::span<const int> targets, const NeighborSource& nbrs) {
  const int K = m.config.num_gcn_layers;
  if (!m.config.use_bipar) throw ConfigError("Bipar-GCN branch is disabled in this model");
  if (nbrs.max_layer() < K) {
    throw ConfigError("neighbor source provides " + std::to_string(nbrs.max_layer()) +
                      " sampled layers but the encoder needs " + std::to_string(K));
  }
  LevelPlan plan = build_plan(side, targets, nbrs, K);

  // h[d] holds h^{k-1} for the nodes at depth d; overwritten in place.
  std::vector<typename Ctx::Ref> h(K + 1);
  for (int d = 0; d <= K; ++d) {
    h[d] = ctx.param_gather(m.embeddings(depth_side(side, d)), plan.nodes[d]);
  }
  for (int k = 1; k <= K; ++k) {
    for (int d = 0; d + k <= K; ++d) {
      const Side s = depth_side(side, d);
      auto& layer = (s == Side::kUser ? m.user_layers : m.item_layers)[k - 1];
      auto proj = ctx.matmul_param(h[d + 1], layer.Q);
      auto gathered = ctx.gather_rows(proj, plan.child_pos[d]);
      auto agg = ctx.dropout(ctx.tanh(ctx.segment_mean(gathered, plan.offsets[d])));
      h[d] = ctx.tanh(ctx.matmul_param(ctx.concat_cols(h[d], agg), layer.W));
    }
  }
  return h[0];
}

template <class Ctx>
typename Ctx::Ref mge_encode_impl(Ctx& ctx, typename Ctx::Model& m, Side side,
                                  std::span<const int> targets, const SimilarityGraph& graph) {
  std::vector<int> flat;
  std::vector<int> offsets{0};
  offsets.reserve(targets.size() + 1);
  for (int node : targets) {
    const auto& nb = graph.neighbors[node];
    flat.insert(flat.end(), nb.begin(), nb.end());
    offsets.push_back(static_cast<int>(flat.size()));
  }
  auto gathered = ctx.param_gather(m.embeddings(side), std::move(flat));
  auto summed = ctx.segment_sum(gathered, offsets);
  auto& proj = side == Side::kUser ? m.M_user : m.M_item;
  return ctx.tanh(ctx.matmul_param(summed, proj));
}

template <class Ctx>
typename Ctx::Ref skip_encode_impl(Ctx& ctx, typename Ctx::Model& m, Side side,
                                   std::span<const int> targets) {
  auto e = ctx.param_gather(m.embeddings(side), {targets.begin(), targets.end()});
  auto& proj = side == Side::kUser ? m.S_user : m.S_item;
  return ctx.tanh(ctx.matmul_param(e, proj));
}

template <class Ctx>
typename Ctx::Ref fused_embed_impl(Ctx& ctx, typename Ctx::Model& m, Side side,
                                   std::span<const int> targets, const EncodeSources& src) {
  const ModelConfig& cfg = m.config;
  std::vector<std::pair<int, typename Ctx::Ref>> branches;
  if (cfg.use_bipar) {
    if (!src.bipartite) throw ConfigError("bipartite neighbor source missing");
    branches.emplace_back(0, bipar_encode_impl(ctx, m, side, targets, *src.bipartite));
  }
  if (cfg.use_mge) {
    if (!src.user_graph || !src.item_graph) throw ConfigError("similarity graphs missing");
    branches.emplace_back(1, mge_encode_impl(ctx, m, side, targets, src.similarity(side)));
  }
  if (cfg.use_skip) {
    branches.emplace_back(2, skip_encode_impl(ctx, m, side, targets));
  }
  if (branches.empty()) throw ConfigError("no embedding branch enabled");
  if (branches.size() == 1) return branches[0].second;

  switch (cfg.fusion) {
    case FusionMode::kSum: {
      auto acc = branches[0].second;
      for (std::size_t t = 1; t < branches.size(); ++t) acc = ctx.add(acc, branches[t].second);
      return acc;
    }
    case FusionMode::kConcat: {
      auto acc = branches[0].second;
      for (std::size_t t = 1; t < branches.size(); ++t) {
        acc = ctx.concat_cols(acc, branches[t].second);
      }
      return acc;
    }
    case FusionMode::kAttention: {
      Parameter* wa[3] = {&const_cast<Parameter&>(m.W_a1), &const_cast<Parameter&>(m.W_a2),
                          &const_cast<Parameter&>(m.W_a3)};
      auto inner = ctx.matmul_param(branches[0].second, *wa[branches[0].first]);
      for (std::size_t t = 1; t < branches.size(); ++t) {
        inner = ctx.add(inner, ctx.matmul_param(branches[t].second, *wa[branches[t].first]));
      }
      auto logits_full = ctx.matmul_param(ctx.tanh(inner), const_cast<Parameter&>(m.W_as));
      // Disabled branches are dropped from the softmax (renormalized).
      auto logits = ctx.slice_cols(logits_full, branches[0].first, branches[0].first + 1);
      for (std::size_t t = 1; t < branches.size(); ++t) {
        logits = ctx.concat_cols(
            logits, ctx.slice_cols(logits_full, branches[t].first, branches[t].first + 1));
      }
      auto weights = ctx.softmax_rows(logits);
      auto acc = ctx.rowwise_scale(branches[0].second, ctx.slice_cols(weights, 0, 1));
      for (std::size_t t = 1; t < branches.size(); ++t) {
        acc = ctx.add(acc, ctx.rowwise_scale(branches[t].second,
                                             ctx.slice_cols(weights, static_cast<int>(t),
                                                            static_cast<int>(t) + 1)));
      }
      return acc;
    }
  }
  throw ConfigError("unknown fusion mode");
}

void check_sorted_unique(std::span<const int> targets) {
  for (std::size_t i = 1; i < targets.size(); ++i) {
    if (targets[i] <= targets[i - 1]) {
      throw ConfigError("encoder targets must be sorted and unique");
    }
  }
}

}  // namespace

ValueId bipar_gcn_encode(Tape& tape, MultiGccfModel& m, Side side, std::span<const int> targets,
                         const NeighborSource& nbrs, bool training, Rng* dropout_rng) {
  check_sorted_unique(targets);
  TapeCtx ctx{tape, training, m.config.dropout_rate, dropout_rng};
  return bipar_encode_impl(ctx, m, side, targets, nbrs);
}

Matrix bipar_gcn_encode(const MultiGccfModel& m, Side side, std::span<const int> targets,
                        const NeighborSource& nbrs) {
  check_sorted_unique(targets);
  EvalCtx ctx;
  return bipar_encode_impl(ctx, m, side, targets, nbrs);
}

ValueId mge_encode(Tape& tape, MultiGccfModel& m, Side side, std::span<const int> targets,
                   const SimilarityGraph& graph) {
  check_sorted_unique(targets);
  TapeCtx ctx{tape, false, 0.0, nullptr};
  return mge_encode_impl(ctx, m, side, targets, graph);
}

Matrix mge_encode(const MultiGccfModel& m, Side side, std::span<const int> targets,
                  const SimilarityGraph& graph) {
  check_sorted_unique(targets);
  EvalCtx ctx;
  return mge_encode_impl(ctx, m, side, targets, graph);
}

ValueId skip_encode(Tape& tape, MultiGccfModel& m, Side side, std::span<const int> targets) {
  check_sorted_unique(targets);
  TapeCtx ctx{tape, false, 0.0, nullptr};
  return skip_encode_impl(ctx, m, side, targets);
}

Matrix skip_encode(const MultiGccfModel& m, Side side, std::span<const int> targets) {
  check_sorted_unique(targets);
  EvalCtx ctx;
  return skip_encode_impl(ctx, m, side, targets);
}

ValueId fused_embed(Tape& tape, MultiGccfModel& m, Side side, std::span<const int> targets,
                    const EncodeSources& src, bool training, Rng* dropout_rng) {
  check_sorted_unique(targets);
  TapeCtx ctx{tape, training, m.config.dropout_rate, dropout_rng};
  return fused_embed_impl(ctx, m, side, targets, src);
}

Matrix fused_embed(const MultiGccfModel& m, Side side, std::span<const int> targets,
                   const EncodeSources& src) {
  check_sorted_unique(targets);
  EvalCtx ctx;
  return fused_embed_impl(ctx, m, side, targets, src);
}

Matrix fused_embed_chunked(const MultiGccfModel& m, Side side, std::span<const int> targets,
                           const EncodeSources& src, bool parallel) {
  const int n = static_cast<int>(targets.size());
  Matrix out(n, m.config.fused_dim());
  constexpr int kChunk = 256;
  const int n_chunks = (n + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int c = 0; c < n_chunks; ++c) {
    const int begin = c * kChunk;
    const int end = std::min(n, begin + kChunk);
    const std::vector<int> chunk(targets.begin() + begin, targets.begin() + end);
    const Matrix em = fused_embed(m, side, chunk, src);
    std::copy(em.data.begin(), em.data.end(),
              out.data.begin() + static_cast<std::size_t>(begin) * out.cols);
  }
  return out;
}

Matrix fused_embed_all(const MultiGccfModel& m, Side side, const EncodeSources& src,
                       bool parallel) {
  const int n = side == Side::kUser ? m.num_users : m.num_items;
  std::vector<int> targets(n);
  for (int i = 0; i < n; ++i) targets[i] = i;
  return fused_embed_chunked(m, side, targets, src, parallel);
}

double score(std::span<const double> fused_user, std::span<const double> fused_item) {
  if (fused_user.size() != fused_item.size()) {
    throw DimensionError("score: dim mismatch " + std::to_string(fused_user.size()) + " vs " +
                         std::to_string(fused_item.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < fused_user.size(); ++i) acc += fused_user[i] * fused_item[i];
  return acc;
}

namespace {

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<int> positions_in(const std::vector<int>& uniq, const std::vector<int>& values) {
  std::vector<int> pos(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    pos[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), values[i]) - uniq.begin());
  }
  return pos;
}

}  // namespace

ValueId multi_gccf_bpr_loss(Tape& tape, MultiGccfModel& m, std::span<const Triplet> batch,
                            const EncodeSources& src, bool training, Rng* dropout_rng) {
  if (batch.empty()) throw ConfigError("bpr loss needs a nonempty batch");
  std::vector<int> us, items;
  us.reserve(batch.size());
  items.reserve(batch.size() * 2);
  for (const Triplet& t : batch) {
    us.push_back(t.u);
    items.push_back(t.i);
    items.push_back(t.j);
  }
  const std::vector<int> uniq_users = sorted_unique(us);
  const std::vector<int> uniq_items = sorted_unique(items);

  const ValueId ue = fused_embed(tape, m, Side::kUser, uniq_users, src, training, dropout_rng);
  const ValueId ve = fused_embed(tape, m, Side::kItem, uniq_items, src, training, dropout_rng);

  std::vector<int> pu(batch.size()), pi(batch.size()), pj(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    pu[t] = static_cast<int>(
        std::lower_bound(uniq_users.begin(), uniq_users.end(), batch[t].u) - uniq_users.begin());
    pi[t] = static_cast<int>(
        std::lower_bound(uniq_items.begin(), uniq_items.end(), batch[t].i) - uniq_items.begin());
    pj[t] = static_cast<int>(
        std::lower_bound(uniq_items.begin(), uniq_items.end(), batch[t].j) - uniq_items.begin());
  }
  const ValueId eu = tape.gather_rows(ue, std::move(pu));
  const ValueId ei = tape.gather_rows(ve, std::move(pi));
  const ValueId ej = tape.gather_rows(ve, std::move(pj));

  const ValueId gap = tape.sub(tape.rows_dot(eu, ei), tape.rows_dot(eu, ej));
  ValueId loss = tape.sum_all(tape.softplus(tape.scale(gap, -1.0)));

  if (m.config.lambda_reg > 0.0) {
    ValueId reg = 0;
    bool first = true;
    for (Parameter* w : m.weight_matrices()) {
      const ValueId term = tape.sum_sq(tape.param(*w));
      reg = first ? term : tape.add(reg, term);
      first = false;
    }
    if (!first) loss = tape.add(loss, tape.scale(reg, m.config.lambda_reg));
  }
  if (m.config.beta_reg > 0.0) {
    ValueId emb = tape.add(tape.add(tape.sum_sq(eu), tape.sum_sq(ei)), tape.sum_sq(ej));
    loss = tape.add(loss, tape.scale(emb, m.config.beta_reg));
  }
  return loss;
}

BprmfModel BprmfModel::init(int num_users, int num_items, int dim, double lambda_reg, Rng& rng) {
  BprmfModel m;
  m.dim = dim;
  m.lambda_reg = lambda_reg;
  m.e_user = Parameter("e_user", xavier_init(num_users, dim, rng));
  m.e_item = Parameter("e_item", xavier_init(num_items, dim, rng));
  return m;
}

ValueId bprmf_loss(Tape& tape, BprmfModel& m, std::span<const Triplet> batch) {
  if (batch.empty()) throw ConfigError("bpr loss needs a nonempty batch");
  std::vector<int> us(batch.size()), is(batch.size()), js(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    us[t] = batch[t].u;
    is[t] = batch[t].i;
    js[t] = batch[t].j;
  }
  const ValueId eu = tape.gather_rows(tape.param(m.e_user), std::move(us));
  const ValueId ei = tape.gather_rows(tape.param(m.e_item), std::move(is));
  const ValueId ej = tape.gather_rows(tape.param(m.e_item), std::move(js));
  const ValueId gap = tape.sub(tape.rows_dot(eu, ei), tape.rows_dot(eu, ej));
  ValueId loss = tape.sum_all(tape.softplus(tape.scale(gap, -1.0)));
  if (m.lambda_reg > 0.0) {
    const ValueId reg = tape.add(tape.add(tape.sum_sq(eu), tape.sum_sq(ei)), tape.sum_sq(ej));
    loss = tape.add(loss, tape.scale(reg, m.lambda_reg));
  }
  return loss;
}

}  // namespace mgccf
