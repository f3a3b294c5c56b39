#include "mgccf/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mgccf/errors.hpp"

namespace mgccf {

using nlohmann::json;

namespace {

json model_to_json(const ModelConfig& m) {
  return json{{"input_dim", m.input_dim},
              {"layer1_dim", m.layer1_dim},
              {"output_dim", m.output_dim},
              {"num_gcn_layers", m.num_gcn_layers},
              {"sample_sizes", m.sample_sizes},
              {"fusion", to_string(m.fusion)},
              {"dropout_rate", m.dropout_rate},
              {"lambda_reg", m.lambda_reg},
              {"beta_reg", m.beta_reg},
              {"use_bipar", m.use_bipar},
              {"use_mge", m.use_mge},
              {"use_skip", m.use_skip},
              {"attention_dim", m.attention_dim}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.input_dim = j.value("input_dim", m.input_dim);
  m.layer1_dim = j.value("layer1_dim", m.layer1_dim);
  m.output_dim = j.value("output_dim", m.output_dim);
  m.num_gcn_layers = j.value("num_gcn_layers", m.num_gcn_layers);
  m.sample_sizes = j.value("sample_sizes", m.sample_sizes);
  m.fusion = fusion_from_string(j.value("fusion", to_string(m.fusion)));
  m.dropout_rate = j.value("dropout_rate", m.dropout_rate);
  m.lambda_reg = j.value("lambda_reg", m.lambda_reg);
  m.beta_reg = j.value("beta_reg", m.beta_reg);
  m.use_bipar = j.value("use_bipar", m.use_bipar);
  m.use_mge = j.value("use_mge", m.use_mge);
  m.use_skip = j.value("use_skip", m.use_skip);
  m.attention_dim = j.value("attention_dim", m.attention_dim);
  return m;
}

json train_to_json(const TrainConfig& t) {
  return json{{"learning_rate", t.learning_rate},
              {"batch_size", t.batch_size},
              {"max_epochs", t.max_epochs},
              {"early_stop_patience", t.early_stop_patience},
              {"seed", t.seed},
              {"eval_every", t.eval_every},
              {"val_user_sample", t.val_user_sample},
              {"val_cutoff", t.val_cutoff},
              {"adam_beta1", t.adam_beta1},
              {"adam_beta2", t.adam_beta2},
              {"adam_eps", t.adam_eps},
              {"parallel_eval", t.parallel_eval}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.max_epochs = j.value("max_epochs", t.max_epochs);
  t.early_stop_patience = j.value("early_stop_patience", t.early_stop_patience);
  t.seed = j.value("seed", t.seed);
  t.eval_every = j.value("eval_every", t.eval_every);
  t.val_user_sample = j.value("val_user_sample", t.val_user_sample);
  t.val_cutoff = j.value("val_cutoff", t.val_cutoff);
  t.adam_beta1 = j.value("adam_beta1", t.adam_beta1);
  t.adam_beta2 = j.value("adam_beta2", t.adam_beta2);
  t.adam_eps = j.value("adam_eps", t.adam_eps);
  t.parallel_eval = j.value("parallel_eval", t.parallel_eval);
  return t;
}

json graph_to_json(const GraphBundleParams& g) {
  return json{{"target_avg_degree", g.target_avg_degree},
              {"max_degree_cap", g.max_degree_cap},
              {"exact_count_cutoff", g.exact_count_cutoff},
              {"degree_sample_nodes", g.degree_sample_nodes},
              {"max_eval_neighbors", g.max_eval_neighbors},
              {"sample_sizes", g.sample_sizes},
              {"num_presample_sets", g.num_presample_sets},
              {"seed", g.seed}};
}

GraphBundleParams graph_from_json(const json& j) {
  GraphBundleParams g;
  g.target_avg_degree = j.value("target_avg_degree", g.target_avg_degree);
  g.max_degree_cap = j.value("max_degree_cap", g.max_degree_cap);
  g.exact_count_cutoff = j.value("exact_count_cutoff", g.exact_count_cutoff);
  g.degree_sample_nodes = j.value("degree_sample_nodes", g.degree_sample_nodes);
  g.max_eval_neighbors = j.value("max_eval_neighbors", g.max_eval_neighbors);
  g.sample_sizes = j.value("sample_sizes", g.sample_sizes);
  g.num_presample_sets = j.value("num_presample_sets", g.num_presample_sets);
  g.seed = j.value("seed", g.seed);
  return g;
}

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(std::string("invalid JSON in ") + what);
  return j;
}

}  // namespace

void RunConfig::apply_seed() {
  graph.seed = seed;
  train.seed = seed;
}

std::string to_json_string(const ModelConfig& cfg) { return model_to_json(cfg).dump(2); }

ModelConfig model_config_from_json(const std::string& json_text) {
  return model_from_json(parse(json_text, "model config"));
}

std::string to_json_string(const RunConfig& cfg) {
  json j{{"input_path", cfg.input_path},
         {"dataset_path", cfg.dataset_path},
         {"graphs_path", cfg.graphs_path},
         {"checkpoint_path", cfg.checkpoint_path},
         {"output_dir", cfg.output_dir},
         {"format", cfg.format},
         {"min_interactions", cfg.min_interactions},
         {"ratios", {{"train", cfg.ratios.train},
                     {"validation", cfg.ratios.validation},
                     {"test", cfg.ratios.test}}},
         {"graph", graph_to_json(cfg.graph)},
         {"model", model_to_json(cfg.model)},
         {"train", train_to_json(cfg.train)},
         {"cutoffs", cfg.cutoffs},
         {"eval_neighbors", cfg.eval_neighbors},
         {"seed", cfg.seed},
         {"threads", cfg.threads},
         {"model_type", cfg.model_type},
         {"bprmf_dim", cfg.bprmf_dim},
         {"warm_start_path", cfg.warm_start_path},
         {"sweep_lrs", cfg.sweep_lrs},
         {"sweep_regs", cfg.sweep_regs}};
  return j.dump(2);
}

RunConfig run_config_from_json(const std::string& json_text) {
  const json j = parse(json_text, "run config");
  RunConfig c;
  c.input_path = j.value("input_path", c.input_path);
  c.dataset_path = j.value("dataset_path", c.dataset_path);
  c.graphs_path = j.value("graphs_path", c.graphs_path);
  c.checkpoint_path = j.value("checkpoint_path", c.checkpoint_path);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.format = j.value("format", c.format);
  c.min_interactions = j.value("min_interactions", c.min_interactions);
  if (j.contains("ratios")) {
    const json& r = j.at("ratios");
    c.ratios.train = r.value("train", c.ratios.train);
    c.ratios.validation = r.value("validation", c.ratios.validation);
    c.ratios.test = r.value("test", c.ratios.test);
  }
  if (j.contains("graph")) c.graph = graph_from_json(j.at("graph"));
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("train")) c.train = train_from_json(j.at("train"));
  c.cutoffs = j.value("cutoffs", c.cutoffs);
  c.eval_neighbors = j.value("eval_neighbors", c.eval_neighbors);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.model_type = j.value("model_type", c.model_type);
  c.bprmf_dim = j.value("bprmf_dim", c.bprmf_dim);
  c.warm_start_path = j.value("warm_start_path", c.warm_start_path);
  c.sweep_lrs = j.value("sweep_lrs", c.sweep_lrs);
  c.sweep_regs = j.value("sweep_regs", c.sweep_regs);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str());
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << to_json_string(cfg) << "\n";
}

std::string to_json_string(const CheckpointHeader& h) {
  json j{{"model_type", h.model_type},
         {"num_users", h.num_users},
         {"num_items", h.num_items}};
  if (h.model_type == "multi_gccf") {
    j["model"] = model_to_json(h.model);
  } else {
    j["bprmf_dim"] = h.bprmf_dim;
    j["bprmf_lambda"] = h.bprmf_lambda;
  }
  return j.dump();
}

CheckpointHeader checkpoint_header_from_json(const std::string& json_text) {
  const json j = parse(json_text, "checkpoint header");
  CheckpointHeader h;
  h.model_type = j.value("model_type", std::string());
  h.num_users = j.value("num_users", 0);
  h.num_items = j.value("num_items", 0);
  if (j.contains("model")) h.model = model_from_json(j.at("model"));
  h.bprmf_dim = j.value("bprmf_dim", 0);
  h.bprmf_lambda = j.value("bprmf_lambda", 0.0);
  return h;
}

}  // namespace mgccf
