#include "mgccf/cli.hpp"

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mgccf/errors.hpp"
#include "mgccf/evaluation.hpp"
#include "mgccf/model_io.hpp"
#include "mgccf/run_config.hpp"
#include "mgccf/serialize.hpp"
#include "mgccf/trainer.hpp"

namespace mgccf {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path not set");
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
}

void write_resolved_config(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  save_run_config(cfg, (fs::path(cfg.output_dir) / "resolved_config.json").string());
}

DatasetFormat parse_format(const std::string& s) {
  if (s == "auto") return DatasetFormat::kAuto;
  if (s == "whitespace") return DatasetFormat::kWhitespace;
  if (s == "csv") return DatasetFormat::kCsv;
  throw ConfigError("unknown dataset format '" + s + "' (auto|whitespace|csv)");
}

EvalNeighborMode parse_eval_neighbors(const std::string& s) {
  if (s == "full") return EvalNeighborMode::kFullCapped;
  if (s == "sampled-union") return EvalNeighborMode::kSampledUnion;
  throw ConfigError("unknown eval-neighbors mode '" + s + "' (full|sampled-union)");
}

void write_eval_report(const EvalReport& rep, const RunConfig& cfg, const std::string& stem) {
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream csv(fs::path(cfg.output_dir) / (stem + ".csv"));
    csv << "cutoff,recall,ndcg\n";
    for (std::size_t c = 0; c < rep.cutoffs.size(); ++c) {
      csv << rep.cutoffs[c] << "," << fmt(rep.recall[c]) << "," << fmt(rep.ndcg[c]) << "\n";
    }
  }
  {
    std::ofstream js(fs::path(cfg.output_dir) / (stem + ".json"));
    js << "{\n  \"cutoffs\": [";
    for (std::size_t c = 0; c < rep.cutoffs.size(); ++c) {
      js << (c ? ", " : "") << rep.cutoffs[c];
    }
    js << "],\n  \"recall\": [";
    for (std::size_t c = 0; c < rep.recall.size(); ++c) js << (c ? ", " : "") << fmt(rep.recall[c]);
    js << "],\n  \"ndcg\": [";
    for (std::size_t c = 0; c < rep.ndcg.size(); ++c) js << (c ? ", " : "") << fmt(rep.ndcg[c]);
    js << "],\n  \"users_evaluated\": " << rep.users_evaluated
       << ",\n  \"users_skipped\": " << rep.users_skipped << ",\n  \"ablation\": {"
       << "\"use_bipar\": " << (cfg.model.use_bipar ? "true" : "false")
       << ", \"use_mge\": " << (cfg.model.use_mge ? "true" : "false")
       << ", \"use_skip\": " << (cfg.model.use_skip ? "true" : "false") << ", \"fusion\": \""
       << to_string(cfg.model.fusion) << "\"}\n}\n";
  }
}

int cmd_prepare(RunConfig& cfg) {
  require_file(cfg.input_path, "input interaction file");
  write_resolved_config(cfg);
  const auto raw = load_interactions(cfg.input_path, parse_format(cfg.format));
  const auto indexed = filter_and_index(raw, cfg.min_interactions);
  const InteractionDataset ds = split(indexed, cfg.ratios, cfg.seed);

  const fs::path out = fs::path(cfg.output_dir) / "dataset.mgds";
  save_dataset(ds, out.string());

  char density[32];
  std::snprintf(density, sizeof density, "%.3f%%", ds.density() * 100.0);
  std::cout << "users=" << ds.num_users << " items=" << ds.num_items
            << " interactions=" << ds.total_interactions() << " density=" << density
            << " train=" << ds.train.size() << " validation=" << ds.validation.size()
            << " test=" << ds.test.size() << "\n";
  std::cout << "snapshot=" << out.string() << " checksum=" << fnv1a_file(out.string()) << "\n";
  return 0;
}

int cmd_build_graphs(RunConfig& cfg) {
  require_file(cfg.dataset_path, "dataset snapshot");
  write_resolved_config(cfg);
  const InteractionDataset ds = load_dataset(cfg.dataset_path);
  const GraphBundle bundle = build_graph_bundle(ds, cfg.graph);
  const fs::path out = fs::path(cfg.output_dir) / "graphs.mggb";
  save_bundle(bundle, out.string());
  for (const auto& [name, g] :
       {std::pair{"user-user", &bundle.user_graph}, std::pair{"item-item", &bundle.item_graph}}) {
    std::cout << name << ": threshold=" << fmt(g->threshold)
              << " avg_degree=" << fmt(g->avg_degree())
              << (g->target_unreachable ? " (warning: target degree unreachable)" : "") << "\n";
  }
  std::cout << "bundle=" << out.string() << " checksum=" << fnv1a_file(out.string()) << "\n";
  return 0;
}

void write_epoch_csv(const std::vector<EpochLog>& history, const fs::path& path) {
  std::ofstream csv(path);
  csv << "epoch,mean_loss,val_recall,val_ndcg\n";
  for (const auto& log : history) {
    csv << log.epoch << "," << fmt(log.mean_loss) << "," << fmt(log.val_recall) << ","
        << fmt(log.val_ndcg) << "\n";
  }
}

int cmd_train(RunConfig& cfg) {
  require_file(cfg.dataset_path, "dataset snapshot");
  cfg.model.validate();
  cfg.train.validate();
  write_resolved_config(cfg);
  const InteractionDataset ds = load_dataset(cfg.dataset_path);

  TrainResult result;
  const fs::path ckpt = fs::path(cfg.output_dir) / "checkpoint.mgck";
  if (cfg.model_type == "bprmf") {
    const int dim = cfg.bprmf_dim > 0 ? cfg.bprmf_dim : cfg.model.output_dim;
    Rng init_rng(Rng::mix(cfg.seed, 0x1217ull));
    BprmfModel model = BprmfModel::init(ds.num_users, ds.num_items, dim, cfg.model.lambda_reg,
                                        init_rng);
    BprmfRanker ranker(model);
    result = train(ranker, ds, cfg.train, cfg.cutoffs, &std::cout);
    save_bprmf(ckpt.string(), model);
  } else if (cfg.model_type == "multi-gccf") {
    require_file(cfg.graphs_path, "graph bundle");
    const GraphBundle bundle = load_bundle(cfg.graphs_path);
    Rng init_rng(Rng::mix(cfg.seed, 0x1217ull));
    MultiGccfModel model = MultiGccfModel::init(cfg.model, ds.num_users, ds.num_items, init_rng);
    if (!cfg.warm_start_path.empty()) {
      require_file(cfg.warm_start_path, "warm-start checkpoint");
      warm_start_from_bprmf(model, load_bprmf(cfg.warm_start_path));
    }
    MultiGccfRanker ranker(model, bundle, parse_eval_neighbors(cfg.eval_neighbors));
    result = train(ranker, ds, cfg.train, cfg.cutoffs, &std::cout);
    save_multi_gccf(ckpt.string(), model);
  } else {
    throw ConfigError("unknown model type '" + cfg.model_type + "' (multi-gccf|bprmf)");
  }

  write_epoch_csv(result.state.history, fs::path(cfg.output_dir) / "epochs.csv");
  write_eval_report(result.final_report, cfg, "eval");
  std::cout << "best_epoch=" << result.state.best_epoch
            << " best_val_recall@" << cfg.train.val_cutoff << "="
            << fmt(result.state.best_validation_recall) << "\n";
  for (std::size_t c = 0; c < result.final_report.cutoffs.size(); ++c) {
    std::cout << "test recall@" << result.final_report.cutoffs[c] << "="
              << fmt(result.final_report.recall[c]) << " ndcg@" << result.final_report.cutoffs[c]
              << "=" << fmt(result.final_report.ndcg[c]) << "\n";
  }
  std::cout << "checkpoint=" << ckpt.string() << " checksum=" << fnv1a_file(ckpt.string()) << "\n";
  return 0;
}

// Builds inference embeddings for whichever model type the checkpoint holds.
std::pair<Matrix, Matrix> checkpoint_embeddings(const RunConfig& cfg, const InteractionDataset& ds,
                                                const Checkpoint& ck) {
  const CheckpointHeader header = checkpoint_header_from_json(ck.header_json);
  if (header.num_users != ds.num_users || header.num_items != ds.num_items) {
    throw ConfigError("checkpoint was trained on a different dataset snapshot");
  }
  if (header.model_type == "bprmf") {
    const BprmfModel model = bprmf_from_checkpoint(ck);
    return {model.e_user.value, model.e_item.value};
  }
  require_file(cfg.graphs_path, "graph bundle");
  const GraphBundle bundle = load_bundle(cfg.graphs_path);
  MultiGccfModel model = multi_gccf_from_checkpoint(ck);
  MultiGccfRanker ranker(model, bundle, parse_eval_neighbors(cfg.eval_neighbors));
  std::vector<int> all_users(ds.num_users);
  for (int u = 0; u < ds.num_users; ++u) all_users[u] = u;
  return {ranker.user_embeddings(all_users, true), ranker.item_embeddings(true)};
}

int cmd_evaluate(RunConfig& cfg, bool per_user_dump) {
  require_file(cfg.dataset_path, "dataset snapshot");
  require_file(cfg.checkpoint_path, "checkpoint");
  write_resolved_config(cfg);
  const InteractionDataset ds = load_dataset(cfg.dataset_path);
  const Checkpoint ck = load_checkpoint(cfg.checkpoint_path);
  const auto [uvecs, ivecs] = checkpoint_embeddings(cfg, ds, ck);

  std::vector<std::vector<double>> per_user;
  const EvalReport rep = evaluate(uvecs, ivecs, ds, cfg.cutoffs, {}, true,
                                  per_user_dump ? &per_user : nullptr);
  write_eval_report(rep, cfg, "eval");
  if (per_user_dump) {
    std::ofstream csv(fs::path(cfg.output_dir) / "per_user.csv");
    csv << "row";
    for (int k : rep.cutoffs) csv << ",recall@" << k;
    for (int k : rep.cutoffs) csv << ",ndcg@" << k;
    csv << "\n";
    for (std::size_t r = 0; r < per_user.size(); ++r) {
      csv << r;
      for (double v : per_user[r]) csv << "," << fmt(v);
      csv << "\n";
    }
  }
  for (std::size_t c = 0; c < rep.cutoffs.size(); ++c) {
    std::cout << "recall@" << rep.cutoffs[c] << "=" << fmt(rep.recall[c]) << " ndcg@"
              << rep.cutoffs[c] << "=" << fmt(rep.ndcg[c]) << "\n";
  }
  std::cout << "users_evaluated=" << rep.users_evaluated
            << " users_skipped=" << rep.users_skipped << "\n";
  return 0;
}

int cmd_sweep(RunConfig& cfg) {
  require_file(cfg.dataset_path, "dataset snapshot");
  require_file(cfg.graphs_path, "graph bundle");
  write_resolved_config(cfg);
  const InteractionDataset ds = load_dataset(cfg.dataset_path);
  const GraphBundle bundle = load_bundle(cfg.graphs_path);
  std::vector<double> regs = cfg.sweep_regs;
  if (regs.empty()) regs.push_back(cfg.model.lambda_reg);

  struct Row {
    double lr, reg, recall, ndcg;
  };
  std::vector<Row> rows;
  for (double lr : cfg.sweep_lrs) {
    for (double reg : regs) {
      RunConfig run = cfg;
      run.model.lambda_reg = reg;
      run.train.learning_rate = lr;
      Rng init_rng(Rng::mix(run.seed, 0x1217ull));
      MultiGccfModel model = MultiGccfModel::init(run.model, ds.num_users, ds.num_items, init_rng);
      MultiGccfRanker ranker(model, bundle, parse_eval_neighbors(run.eval_neighbors));
      const TrainResult r = train(ranker, ds, run.train, run.cutoffs, nullptr);
      rows.push_back({lr, reg, r.final_report.recall[0], r.final_report.ndcg[0]});
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].recall > rows[best].recall) best = i;
  }
  std::ofstream csv(fs::path(cfg.output_dir) / "sweep.csv");
  csv << "learning_rate,lambda,recall@" << cfg.cutoffs[0] << ",ndcg@" << cfg.cutoffs[0]
      << ",best\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << fmt(rows[i].lr) << "," << fmt(rows[i].reg) << "," << fmt(rows[i].recall) << ","
        << fmt(rows[i].ndcg) << "," << (i == best ? 1 : 0) << "\n";
    std::cout << "lr=" << fmt(rows[i].lr) << " lambda=" << fmt(rows[i].reg)
              << " recall@" << cfg.cutoffs[0] << "=" << fmt(rows[i].recall)
              << " ndcg@" << cfg.cutoffs[0] << "=" << fmt(rows[i].ndcg)
              << (i == best ? "  <-- best" : "") << "\n";
  }
  return 0;
}

void write_embedding_tsv(const Matrix& m, const fs::path& path) {
  std::ofstream out(path);
  for (int r = 0; r < m.rows; ++r) {
    out << r << "\t";
    const double* row = m.row(r);
    for (int c = 0; c < m.cols; ++c) out << (c ? "," : "") << fmt(row[c]);
    out << "\n";
  }
}

int cmd_export_embeddings(RunConfig& cfg) {
  require_file(cfg.dataset_path, "dataset snapshot");
  require_file(cfg.checkpoint_path, "checkpoint");
  write_resolved_config(cfg);
  const InteractionDataset ds = load_dataset(cfg.dataset_path);
  const Checkpoint ck = load_checkpoint(cfg.checkpoint_path);
  const auto [uvecs, ivecs] = checkpoint_embeddings(cfg, ds, ck);
  const fs::path udst = fs::path(cfg.output_dir) / "user_embeddings.tsv";
  const fs::path idst = fs::path(cfg.output_dir) / "item_embeddings.tsv";
  write_embedding_tsv(uvecs, udst);
  write_embedding_tsv(ivecs, idst);
  std::cout << "wrote " << udst.string() << " (" << uvecs.rows << "x" << uvecs.cols << ")\n";
  std::cout << "wrote " << idst.string() << " (" << ivecs.rows << "x" << ivecs.cols << ")\n";
  return 0;
}

std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  RunConfig cfg;
  try {
    const std::string config_path = find_config_path(args);
    if (!config_path.empty()) cfg = load_run_config(config_path);

    CLI::App app{"Multi-graph convolution collaborative filtering engine"};
    app.require_subcommand(1);
    std::string config_dummy;
    app.add_option("--config", config_dummy, "JSON run config (flags override it)");
    app.add_option("--threads", cfg.threads, "worker thread cap (MGCCF_THREADS as fallback)");
    app.add_option("--seed", cfg.seed, "master seed for all stochastic steps");

    auto add_common_out = [&](CLI::App* sub) {
      sub->add_option("--out", cfg.output_dir, "output directory");
    };

    auto* prep = app.add_subcommand("prepare", "ingest, filter, index and split interactions");
    prep->add_option("--input", cfg.input_path, "raw interaction file");
    prep->add_option("--format", cfg.format, "auto|whitespace|csv");
    prep->add_option("--min-interactions", cfg.min_interactions, "entity filter threshold");
    std::vector<double> ratio_args;
    prep->add_option("--ratios", ratio_args, "train,validation,test ratios")->delimiter(',');
    add_common_out(prep);

    auto* graphs = app.add_subcommand("build-graphs", "build bipartite + similarity graphs");
    graphs->add_option("--dataset", cfg.dataset_path, "dataset snapshot (.mgds)");
    graphs->add_option("--target-degree", cfg.graph.target_avg_degree,
                       "similarity-graph average degree target");
    graphs->add_option("--max-mge-degree", cfg.graph.max_degree_cap,
                       "similarity neighbor list cap");
    graphs->add_option("--max-eval-neighbors", cfg.graph.max_eval_neighbors,
                       "inference neighbor list cap");
    graphs->add_option("--sample-sizes", cfg.graph.sample_sizes, "per-layer sample sizes")
        ->delimiter(',');
    graphs->add_option("--num-sets", cfg.graph.num_presample_sets, "pre-sampled sets per node");
    graphs->add_option("--exact-cutoff", cfg.graph.exact_count_cutoff,
                       "max node count for exact degree calibration");
    add_common_out(graphs);

    auto* tr = app.add_subcommand("train", "train a model and keep the best checkpoint");
    tr->add_option("--dataset", cfg.dataset_path, "dataset snapshot (.mgds)");
    tr->add_option("--graphs", cfg.graphs_path, "graph bundle (.mggb)");
    tr->add_option("--model", cfg.model_type, "multi-gccf|bprmf");
    tr->add_option("--bprmf-dim", cfg.bprmf_dim, "BPRMF embedding dim (0 = output dim)");
    tr->add_option("--warm-start", cfg.warm_start_path, "BPRMF checkpoint for frozen embeddings");
    tr->add_option("--input-dim", cfg.model.input_dim, "initial embedding dim");
    tr->add_option("--layer1-dim", cfg.model.layer1_dim, "first GCN layer dim");
    tr->add_option("--output-dim", cfg.model.output_dim, "final embedding dim");
    auto* hops = tr->add_option("--bipar-hops", cfg.model.num_gcn_layers, "GCN layers (1 or 2)");
    std::string fusion_arg;
    tr->add_option("--fusion", fusion_arg, "sum|concat|attention");
    auto* no_mge = tr->add_flag("--no-mge", "disable the similarity-graph branch");
    auto* no_skip = tr->add_flag("--no-skip", "disable the skip-connection branch");
    auto* no_bipar = tr->add_flag("--no-bipar", "disable the bipartite GCN branch");
    tr->add_option("--dropout", cfg.model.dropout_rate, "neighborhood dropout rate");
    tr->add_option("--lambda", cfg.model.lambda_reg, "weight-matrix L2 coefficient");
    tr->add_option("--beta", cfg.model.beta_reg, "embedding L2 coefficient");
    tr->add_option("--lr", cfg.train.learning_rate, "Adam learning rate");
    tr->add_option("--batch-size", cfg.train.batch_size, "triplets per batch");
    tr->add_option("--max-epochs", cfg.train.max_epochs, "epoch cap");
    tr->add_option("--patience", cfg.train.early_stop_patience,
                   "early stop after this many non-improving validations");
    tr->add_option("--eval-every", cfg.train.eval_every, "epochs between validations");
    tr->add_option("--val-users", cfg.train.val_user_sample, "validation user sample");
    tr->add_option("--cutoffs", cfg.cutoffs, "report cutoffs")->delimiter(',');
    tr->add_option("--eval-neighbors", cfg.eval_neighbors, "full|sampled-union");
    add_common_out(tr);

    auto* ev = app.add_subcommand("evaluate", "full-ranking metrics for a checkpoint");
    ev->add_option("--dataset", cfg.dataset_path, "dataset snapshot (.mgds)");
    ev->add_option("--graphs", cfg.graphs_path, "graph bundle (.mggb)");
    ev->add_option("--checkpoint", cfg.checkpoint_path, "model checkpoint (.mgck)");
    ev->add_option("--cutoffs", cfg.cutoffs, "cutoffs, e.g. 10,20")->delimiter(',');
    ev->add_option("--eval-neighbors", cfg.eval_neighbors, "full|sampled-union");
    auto* per_user = ev->add_flag("--per-user", "also dump per-user metrics");
    add_common_out(ev);

    auto* sw = app.add_subcommand("sweep", "grid search over learning rate x lambda");
    sw->add_option("--dataset", cfg.dataset_path, "dataset snapshot (.mgds)");
    sw->add_option("--graphs", cfg.graphs_path, "graph bundle (.mggb)");
    sw->add_option("--lrs", cfg.sweep_lrs, "learning-rate grid")->delimiter(',');
    sw->add_option("--regs", cfg.sweep_regs, "lambda grid")->delimiter(',');
    sw->add_option("--max-epochs", cfg.train.max_epochs, "epoch cap per run");
    sw->add_option("--cutoffs", cfg.cutoffs, "report cutoffs")->delimiter(',');
    add_common_out(sw);

    auto* ex = app.add_subcommand("export-embeddings", "dump fused embeddings as TSV");
    ex->add_option("--dataset", cfg.dataset_path, "dataset snapshot (.mgds)");
    ex->add_option("--graphs", cfg.graphs_path, "graph bundle (.mggb)");
    ex->add_option("--checkpoint", cfg.checkpoint_path, "model checkpoint (.mgck)");
    ex->add_option("--eval-neighbors", cfg.eval_neighbors, "full|sampled-union");
    add_common_out(ex);

    std::vector<const char*> argv{"mgccf"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      return app.exit(e);
    }

    if (cfg.threads == 0) {
      if (const char* env = std::getenv("MGCCF_THREADS")) cfg.threads = std::atoi(env);
    }
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    cfg.apply_seed();

    if (prep->parsed()) {
      if (!ratio_args.empty()) {
        if (ratio_args.size() != 3) throw ConfigError("--ratios needs three values");
        cfg.ratios = {ratio_args[0], ratio_args[1], ratio_args[2]};
      }
      return cmd_prepare(cfg);
    }
    if (graphs->parsed()) return cmd_build_graphs(cfg);
    if (tr->parsed()) {
      if (!fusion_arg.empty()) cfg.model.fusion = fusion_from_string(fusion_arg);
      if (no_mge->count()) cfg.model.use_mge = false;
      if (no_skip->count()) cfg.model.use_skip = false;
      if (no_bipar->count()) cfg.model.use_bipar = false;
      if (hops->count()) {
        const int k = cfg.model.num_gcn_layers;
        if (static_cast<int>(cfg.model.sample_sizes.size()) > k) {
          cfg.model.sample_sizes.resize(k);
        }
      }
      return cmd_train(cfg);
    }
    if (ev->parsed()) return cmd_evaluate(cfg, per_user->count() > 0);
    if (sw->parsed()) return cmd_sweep(cfg);
    if (ex->parsed()) return cmd_export_embeddings(cfg);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mgccf
