#pragma once

#include <string>

#include "mgccf/graphs.hpp"
#include "mgccf/model.hpp"
#include "mgccf/trainer.hpp"

namespace mgccf {

// Everything one experiment needs, JSON-serializable. Precedence when running
// the CLI: flags > config file > defaults; the resolved config is written next
// to the outputs so a run can be reproduced byte-for-byte.
struct RunConfig {
  std::string input_path;
  std::string dataset_path;
  std::string graphs_path;
  std::string checkpoint_path;
  std::string output_dir = ".";
  std::string format = "auto";  // auto|whitespace|csv

  int min_interactions = 10;
  SplitRatios ratios;

  GraphBundleParams graph;
  ModelConfig model;
  TrainConfig train;

  std::vector<int> cutoffs = {20};
  std::string eval_neighbors = "full";  // full|sampled-union
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = runtime default

  std::string model_type = "multi-gccf";  // multi-gccf|bprmf
  int bprmf_dim = 0;                      // 0 -> model.output_dim
  std::string warm_start_path;            // BPRMF checkpoint for pre-training

  std::vector<double> sweep_lrs = {1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> sweep_regs;  // empty -> just model.lambda_reg

  void apply_seed();  // propagates seed into graph.seed / train.seed
};

std::string to_json_string(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& json_text);

std::string to_json_string(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

// Checkpoint headers are JSON documents naming the model type and config.
struct CheckpointHeader {
  std::string model_type;  // "multi_gccf" | "bprmf"
  ModelConfig model;       // multi_gccf only
  int num_users = 0;
  int num_items = 0;
  int bprmf_dim = 0;        // bprmf only
  double bprmf_lambda = 0;  // bprmf only
};

std::string to_json_string(const CheckpointHeader& h);
CheckpointHeader checkpoint_header_from_json(const std::string& json_text);

}  // namespace mgccf
