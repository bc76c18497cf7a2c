#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ctgcn/aggregate.hpp"
#include "ctgcn/decompose.hpp"
#include "ctgcn/dtw.hpp"
#include "ctgcn/metrics.hpp"
#include "ctgcn/model.hpp"
#include "ctgcn/pcmci.hpp"
#include "ctgcn/synthgen.hpp"
#include "ctgcn/timeseries.hpp"

namespace ctgcn {

// Configuration for a full run. Every stage reads and writes artifacts under
// output_dir so partial runs can resume from files; missing upstream
// artifacts fail with a StageError naming the stage to run first.
struct PipelineConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir = "out";

  struct Dataset {
    std::string path;  // empty means the simulated dataset in output_dir
    char delimiter = ',';
    bool timestamp_column = true;
    int downsample = 1;
    bool normalize = true;
  } dataset;

  struct Simulate {
    bool enabled = false;
    std::string kind = "scm";  // or "diffusion"
    int n_samples = 2000;
    int burn_in = 500;
    // scm
    ScmSpec scm;
    // diffusion
    int nodes = 20;
    double rate = 0.3;
    double noise_std = 0.1;
    double leak = 0.05;
    double graph_density = 0.15;                  // random graph when no edges
    std::vector<std::array<double, 3>> graph_edges;  // explicit i, j, weight
  } simulate;

  struct Discover {
    DiscoveryConfig discovery;
    int period_len = 0;  // 0 means the whole series forms one period
    int clusters = 1;
    int elbow_min = 0;  // both nonzero turns on elbow selection
    int elbow_max = 0;
    std::optional<int> dtw_band;
    int cluster_restarts = 5;
    int max_cluster_size = 0;
    VoteMode vote_mode = VoteMode::kAnyLag;
    AggregationStrategy strategy = AggregationStrategy::kMajorityWeighted;
    bool directed = true;
  } discover;

  struct Forecast {
    WindowSpec window{8, 1, 1};
    int kernel_width = 3;
    int channels = 16;
    int hidden = 16;
    int hidden_out = 8;
    TrainConfig train;
    std::string adjacency = "discovered";  // truth | zero | a file path
    std::optional<TuneSpace> tune;
  } forecast;

  struct Benchmark {
    int repetitions = 3;
  } benchmark;

  std::string config_hash;  // hex FNV-1a of the canonical config document

  void validate() const;
};

// Parses and validates a config document; unknown keys and out-of-range
// values raise ConfigError naming the field.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::string& path);

std::uint64_t stage_seed(const PipelineConfig& cfg, const std::string& stage);

// Stage entry points. Each writes its artifacts plus a manifest entry
// (stage name, derived seed, outputs) under cfg.output_dir.
void stage_simulate(const PipelineConfig& cfg);
void stage_cluster(const PipelineConfig& cfg);
void stage_discover(const PipelineConfig& cfg);
void stage_aggregate(const PipelineConfig& cfg);
void stage_train(const PipelineConfig& cfg);
void stage_forecast(const PipelineConfig& cfg);
void stage_evaluate(const PipelineConfig& cfg);
void stage_benchmark(const PipelineConfig& cfg);

// simulate (when enabled), cluster (when spatial decomposition is on),
// discover, aggregate, train, forecast, evaluate.
void run_pipeline(const PipelineConfig& cfg);

}  // namespace ctgcn
