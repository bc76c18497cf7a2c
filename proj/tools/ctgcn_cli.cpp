// Command-line front end: one subcommand per pipeline stage plus `pipeline`
// to run them in order. Values resolve as flag > environment > config file.
// Exit codes: 0 success, 2 configuration, 3 data, 4 stage failure.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "ctgcn/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
  std::optional<double> alpha;
  std::optional<int> tau_max;
  std::optional<int> period_len;
  std::optional<int> clusters;
  std::optional<std::string> vote_mode;
  std::optional<std::string> strategy;
  std::optional<bool> directed;
  std::optional<int> history_len;
  std::optional<int> horizon;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
  std::optional<std::string> adjacency;
  std::optional<int> repetitions;
  std::optional<std::string> dataset_path;
};

ctgcn::PipelineConfig resolve_config(const std::string& config_path,
                                     const Overrides& ov) {
  ctgcn::PipelineConfig cfg;
  if (!config_path.empty()) {
    cfg = ctgcn::load_pipeline_config(config_path);
  } else {
    nlohmann::json empty = nlohmann::json::object();
    cfg = ctgcn::pipeline_config_from_json(empty);
  }
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.workers) cfg.workers = *ov.workers;
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  if (ov.alpha) cfg.discover.discovery.alpha = *ov.alpha;
  if (ov.tau_max) cfg.discover.discovery.tau_max = *ov.tau_max;
  if (ov.period_len) cfg.discover.period_len = *ov.period_len;
  if (ov.clusters) cfg.discover.clusters = *ov.clusters;
  if (ov.vote_mode)
    cfg.discover.vote_mode = ctgcn::vote_mode_from_string(*ov.vote_mode);
  if (ov.strategy)
    cfg.discover.strategy = ctgcn::strategy_from_string(*ov.strategy);
  if (ov.directed) cfg.discover.directed = *ov.directed;
  if (ov.history_len) cfg.forecast.window.history_len = *ov.history_len;
  if (ov.horizon) cfg.forecast.window.horizon = *ov.horizon;
  if (ov.epochs) cfg.forecast.train.epochs = *ov.epochs;
  if (ov.batch_size) cfg.forecast.train.batch_size = *ov.batch_size;
  if (ov.learning_rate) cfg.forecast.train.learning_rate = *ov.learning_rate;
  if (ov.adjacency) cfg.forecast.adjacency = *ov.adjacency;
  if (ov.repetitions) cfg.benchmark.repetitions = *ov.repetitions;
  if (ov.dataset_path) cfg.dataset.path = *ov.dataset_path;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal discovery and graph-convolutional forecasting"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  app.add_option("-c,--config", config_path, "JSON configuration file");
  app.add_option("--seed", ov.seed, "root seed fanned out to every stage");
  app.add_option("--workers", ov.workers, "worker threads for discovery");
  app.add_option("--output-dir", ov.output_dir, "artifact directory");
  app.add_option("--dataset", ov.dataset_path, "input CSV path");
  app.add_option("--alpha", ov.alpha, "link significance level");
  app.add_option("--tau-max", ov.tau_max, "maximum causal lag");
  app.add_option("--period-len", ov.period_len, "temporal period length");
  app.add_option("--clusters", ov.clusters, "spatial cluster count");
  app.add_option("--vote-mode", ov.vote_mode, "any-lag or mv-lag");
  app.add_option("--strategy", ov.strategy, "ANY;W, MT;W, ANY;UW or MT;UW");
  app.add_flag("--directed,!--undirected", ov.directed,
               "directed or undirected aggregation");
  app.add_option("--history-len", ov.history_len, "forecast input length");
  app.add_option("--horizon", ov.horizon, "forecast output length");
  app.add_option("--epochs", ov.epochs, "training epochs");
  app.add_option("--batch-size", ov.batch_size, "training batch size");
  app.add_option("--learning-rate", ov.learning_rate, "SGD learning rate");
  app.add_option("--adjacency", ov.adjacency,
                 "model graph: discovered, truth, zero, or a JSON path");
  app.add_option("--repetitions", ov.repetitions, "benchmark repetitions");

  // Global flags remain valid after the subcommand name.
  const auto add_stage = [&app](const char* name, const char* desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->fallthrough();
    return cmd;
  };
  auto* cmd_simulate = add_stage("simulate", "generate a synthetic dataset");
  auto* cmd_cluster = add_stage("cluster", "group features by warped distance");
  auto* cmd_discover = add_stage("discover", "run decomposed causal discovery");
  auto* cmd_aggregate = add_stage("aggregate", "vote sub-problem links into one graph");
  auto* cmd_train = add_stage("train", "fit the forecaster");
  auto* cmd_forecast = add_stage("forecast", "predict past the end of the series");
  auto* cmd_evaluate = add_stage("evaluate", "score forecasts and the recovered graph");
  auto* cmd_benchmark = add_stage("benchmark", "time decomposed against monolithic discovery");
  auto* cmd_pipeline = add_stage("pipeline", "run every configured stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const ctgcn::PipelineConfig cfg = resolve_config(config_path, ov);
    if (cmd_simulate->parsed()) ctgcn::stage_simulate(cfg);
    else if (cmd_cluster->parsed()) ctgcn::stage_cluster(cfg);
    else if (cmd_discover->parsed()) ctgcn::stage_discover(cfg);
    else if (cmd_aggregate->parsed()) ctgcn::stage_aggregate(cfg);
    else if (cmd_train->parsed()) ctgcn::stage_train(cfg);
    else if (cmd_forecast->parsed()) ctgcn::stage_forecast(cfg);
    else if (cmd_evaluate->parsed()) ctgcn::stage_evaluate(cfg);
    else if (cmd_benchmark->parsed()) ctgcn::stage_benchmark(cfg);
    else if (cmd_pipeline->parsed()) ctgcn::run_pipeline(cfg);
    return 0;
  } catch (const ctgcn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ctgcn::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ctgcn::StageError& e) {
    std::cerr << "stage error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
