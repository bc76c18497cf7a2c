#include "ctgcn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctgcn/rng.hpp"

namespace ctgcn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void check_keys(const json& j, const std::string& scope,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ConfigError(scope + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      throw ConfigError(scope + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const std::string& scope, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(scope + "." + key + ": wrong type");
  }
}

struct Paths {
  std::string dir;

  std::string join(const std::string& name) const { return dir + "/" + name; }
  std::string dataset() const { return join("dataset.csv"); }
  std::string truth() const { return join("truth_adjacency.json"); }
  std::string clustering() const { return join("clustering.json"); }
  std::string elbow() const { return join("elbow.json"); }
  std::string results() const { return join("discovery_results.json"); }
  std::string timings() const { return join("discovery_timings.json"); }
  std::string adjacency() const { return join("adjacency.json"); }
  std::string adjacency_csv() const { return join("adjacency_edges.csv"); }
  std::string adjacency_dot() const { return join("adjacency.dot"); }
  std::string checkpoint() const { return join("checkpoint.json"); }
  std::string trace() const { return join("train_trace.json"); }
  std::string forecasts() const { return join("forecasts.csv"); }
  std::string evaluation() const { return join("evaluation.json"); }
  std::string report() const { return join("report.txt"); }
  std::string benchmark_json() const { return join("benchmark.json"); }
  std::string benchmark_text() const { return join("benchmark.txt"); }
  std::string manifest() const { return join("manifest.json"); }
};

Paths paths_for(const PipelineConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  return {cfg.output_dir};
}

void record_stage(const PipelineConfig& cfg, const std::string& stage,
                  const std::vector<std::string>& outputs) {
  const Paths paths{cfg.output_dir};
  json manifest;
  std::ifstream in(paths.manifest());
  if (in) {
    try {
      in >> manifest;
    } catch (const json::exception&) {
      manifest = json::object();
    }
  }
  if (!manifest.is_object() ||
      manifest.value("config_hash", "") != cfg.config_hash) {
    manifest = json::object();
    manifest["config_hash"] = cfg.config_hash;
    manifest["root_seed"] = cfg.seed;
    manifest["workers"] = cfg.workers;
    manifest["stages"] = json::array();
  }

  json entry = {{"name", stage},
                {"seed", stage_seed(cfg, stage)},
                {"outputs", outputs}};
  bool replaced = false;
  for (auto& existing : manifest["stages"]) {
    if (existing.value("name", "") == stage) {
      existing = entry;
      replaced = true;
      break;
    }
  }
  if (!replaced) manifest["stages"].push_back(entry);

  std::ofstream out(paths.manifest());
  if (!out) throw DataError("cannot write " + paths.manifest());
  out << manifest.dump(2) << "\n";
}

TimeSeriesDataset resolve_dataset(const PipelineConfig& cfg) {
  const Paths paths{cfg.output_dir};
  const std::string path =
      cfg.dataset.path.empty() ? paths.dataset() : cfg.dataset.path;
  if (cfg.dataset.path.empty() && !fs::exists(path))
    throw StageError("no dataset at " + path +
                     "; run the simulate stage or set dataset.path");
  CsvOptions opts;
  opts.delimiter = cfg.dataset.delimiter;
  opts.timestamp_column = cfg.dataset.timestamp_column;
  TimeSeriesDataset ds = load_csv(path, opts);
  if (cfg.dataset.downsample > 1)
    ds = mean_downsample(ds, cfg.dataset.downsample);
  return ds;
}

int resolve_period_len(const PipelineConfig& cfg, const TimeSeriesDataset& ds) {
  return cfg.discover.period_len > 0 ? cfg.discover.period_len : ds.n_samples();
}

bool spatial_decomposition_on(const PipelineConfig& cfg) {
  return cfg.discover.clusters > 1 ||
         (cfg.discover.elbow_min > 0 && cfg.discover.elbow_max > 0);
}

Clustering resolve_clustering(const PipelineConfig& cfg,
                              const TimeSeriesDataset& ds) {
  if (!spatial_decomposition_on(cfg)) return trivial_clustering(ds.n_features());
  const Paths paths{cfg.output_dir};
  if (!fs::exists(paths.clustering()))
    throw StageError("spatial decomposition needs " + paths.clustering() +
                     "; run the cluster stage first");
  return load_clustering_json(paths.clustering(), ds.feature_names);
}

// Reorders a loaded adjacency onto the dataset's feature order.
CausalAdjacency align_adjacency(const CausalAdjacency& adj,
                                const TimeSeriesDataset& ds) {
  if (adj.n_nodes() != ds.n_features())
    throw DataError("adjacency covers " + std::to_string(adj.n_nodes()) +
                    " nodes, dataset has " + std::to_string(ds.n_features()));
  if (adj.feature_names == ds.feature_names) return adj;
  std::vector<int> map(ds.n_features());
  for (int i = 0; i < ds.n_features(); ++i) {
    const int idx = [&] {
      for (int j = 0; j < adj.n_nodes(); ++j)
        if (adj.feature_names[j] == ds.feature_names[i]) return j;
      throw DataError("adjacency lacks node '" + ds.feature_names[i] + "'");
    }();
    map[i] = idx;
  }
  CausalAdjacency out;
  out.feature_names = ds.feature_names;
  out.directed = adj.directed;
  out.weights.resize(ds.n_features(), ds.n_features());
  for (int a = 0; a < ds.n_features(); ++a)
    for (int b = 0; b < ds.n_features(); ++b)
      out.weights(a, b) = adj.weights(map[a], map[b]);
  return out;
}

CausalAdjacency resolve_model_adjacency(const PipelineConfig& cfg,
                                        const TimeSeriesDataset& ds) {
  const Paths paths{cfg.output_dir};
  const std::string& source = cfg.forecast.adjacency;
  if (source == "zero") {
    CausalAdjacency adj;
    adj.feature_names = ds.feature_names;
    adj.directed = true;
    adj.weights = Matrix::Zero(ds.n_features(), ds.n_features());
    return adj;
  }
  std::string path;
  if (source == "discovered") {
    path = paths.adjacency();
    if (!fs::exists(path))
      throw StageError("no discovered adjacency at " + path +
                       "; run the aggregate stage first");
  } else if (source == "truth") {
    path = paths.truth();
    if (!fs::exists(path))
      throw StageError("no ground-truth adjacency at " + path +
                       "; run the simulate stage first");
  } else {
    path = source;
  }
  return align_adjacency(load_adjacency_json(path), ds);
}

std::pair<TimeSeriesDataset, NormalizationStats> normalized_for_model(
    const PipelineConfig& cfg, const TimeSeriesDataset& ds) {
  if (cfg.dataset.normalize) return zscore_normalize(ds);
  NormalizationStats identity;
  identity.mean = Vector::Zero(ds.n_features());
  identity.stddev = Vector::Ones(ds.n_features());
  return {ds, identity};
}

TimeSeriesDataset apply_stats(const TimeSeriesDataset& ds,
                              const NormalizationStats& stats) {
  if (stats.mean.size() != ds.n_features())
    throw DataError("checkpoint normalization covers " +
                    std::to_string(stats.mean.size()) + " features, dataset has " +
                    std::to_string(ds.n_features()));
  TimeSeriesDataset out = ds;
  for (int i = 0; i < ds.n_features(); ++i)
    out.values.row(i) =
        (ds.values.row(i).array() - stats.mean[i]) / stats.applied_std(i);
  return out;
}

ModelShape shape_for(const PipelineConfig& cfg, const TimeSeriesDataset& ds) {
  ModelShape shape;
  shape.n_nodes = ds.n_features();
  shape.history_len = cfg.forecast.window.history_len;
  shape.horizon = cfg.forecast.window.horizon;
  shape.kernel_width = cfg.forecast.kernel_width;
  shape.channels = cfg.forecast.channels;
  shape.hidden = cfg.forecast.hidden;
  shape.hidden_out = cfg.forecast.hidden_out;
  return shape;
}

}  // namespace

void PipelineConfig::validate() const {
  if (workers < 1) throw ConfigError("workers: must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  if (dataset.downsample < 1)
    throw ConfigError("dataset.downsample: must be >= 1");
  if (simulate.enabled) {
    if (simulate.kind != "scm" && simulate.kind != "diffusion")
      throw ConfigError("simulate.kind: expected scm or diffusion");
    if (simulate.n_samples < 2)
      throw ConfigError("simulate.n_samples: must be >= 2");
    if (simulate.burn_in < 0) throw ConfigError("simulate.burn_in: must be >= 0");
  }
  discover.discovery.validate();
  if (discover.period_len < 0)
    throw ConfigError("discovery.period_len: must be >= 0");
  if (discover.clusters < 1) throw ConfigError("discovery.clusters: must be >= 1");
  if ((discover.elbow_min > 0) != (discover.elbow_max > 0))
    throw ConfigError("discovery.elbow: needs both bounds");
  if (discover.elbow_min > 0 && discover.elbow_min > discover.elbow_max)
    throw ConfigError("discovery.elbow: min exceeds max");
  if (discover.cluster_restarts < 1)
    throw ConfigError("discovery.restarts: must be >= 1");
  if (discover.max_cluster_size < 0)
    throw ConfigError("discovery.max_cluster_size: must be >= 0");
  if (benchmark.repetitions < 1)
    throw ConfigError("benchmark.repetitions: must be >= 1");
  forecast.train.validate();
  if (forecast.window.history_len < 1 || forecast.window.horizon < 1 ||
      forecast.window.stride < 1)
    throw ConfigError("forecast window fields must be >= 1");
  if (forecast.kernel_width < 1 || forecast.channels < 1 ||
      forecast.hidden < 1 || forecast.hidden_out < 1)
    throw ConfigError("forecast model sizes must be >= 1");
  if (forecast.kernel_width > forecast.window.history_len)
    throw ConfigError("forecast.kernel_width: exceeds history_len");
}

PipelineConfig pipeline_config_from_json(const json& j) {
  check_keys(j, "config",
             {"seed", "workers", "output_dir", "dataset", "simulate",
              "discovery", "forecast", "benchmark"});
  PipelineConfig cfg;
  cfg.seed = get_or<std::uint64_t>(j, "config", "seed", 0);
  cfg.workers = get_or<int>(j, "config", "workers", 1);
  cfg.output_dir = get_or<std::string>(j, "config", "output_dir", "out");

  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    check_keys(d, "dataset",
               {"path", "delimiter", "timestamp_column", "downsample",
                "normalize"});
    cfg.dataset.path = get_or<std::string>(d, "dataset", "path", "");
    const std::string delim =
        get_or<std::string>(d, "dataset", "delimiter", ",");
    if (delim.size() != 1)
      throw ConfigError("dataset.delimiter: must be one character");
    cfg.dataset.delimiter = delim[0];
    cfg.dataset.timestamp_column =
        get_or<bool>(d, "dataset", "timestamp_column", true);
    cfg.dataset.downsample = get_or<int>(d, "dataset", "downsample", 1);
    cfg.dataset.normalize = get_or<bool>(d, "dataset", "normalize", true);
  }

  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    check_keys(s, "simulate",
               {"kind", "n_samples", "burn_in", "n_features", "edges",
                "noise_std", "names", "nodes", "rate", "noise", "leak",
                "graph_density", "graph_edges"});
    cfg.simulate.enabled = true;
    cfg.simulate.kind = get_or<std::string>(s, "simulate", "kind", "scm");
    cfg.simulate.n_samples = get_or<int>(s, "simulate", "n_samples", 2000);
    cfg.simulate.burn_in = get_or<int>(s, "simulate", "burn_in", 500);
    if (cfg.simulate.kind == "scm") {
      cfg.simulate.scm.n_features = get_or<int>(s, "simulate", "n_features", 0);
      for (const auto& e : s.value("edges", json::array())) {
        check_keys(e, "simulate.edges[]", {"src", "dst", "lag", "coeff"});
        ScmEdge edge;
        edge.src = get_or<int>(e, "simulate.edges[]", "src", -1);
        edge.dst = get_or<int>(e, "simulate.edges[]", "dst", -1);
        edge.lag = get_or<int>(e, "simulate.edges[]", "lag", 1);
        edge.coeff = get_or<double>(e, "simulate.edges[]", "coeff", 0.0);
        cfg.simulate.scm.edges.push_back(edge);
      }
      cfg.simulate.scm.noise_std =
          get_or<std::vector<double>>(s, "simulate", "noise_std", {});
      cfg.simulate.scm.feature_names =
          get_or<std::vector<std::string>>(s, "simulate", "names", {});
    } else {
      cfg.simulate.nodes = get_or<int>(s, "simulate", "nodes", 20);
      cfg.simulate.rate = get_or<double>(s, "simulate", "rate", 0.3);
      cfg.simulate.noise_std = get_or<double>(s, "simulate", "noise", 0.1);
      cfg.simulate.leak = get_or<double>(s, "simulate", "leak", 0.05);
      cfg.simulate.graph_density =
          get_or<double>(s, "simulate", "graph_density", 0.15);
      for (const auto& e : s.value("graph_edges", json::array())) {
        if (!e.is_array() || e.size() != 3)
          throw ConfigError("simulate.graph_edges: entries must be [i, j, w]");
        cfg.simulate.graph_edges.push_back(
            {e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
      }
    }
  }

  if (j.contains("discovery")) {
    const json& d = j["discovery"];
    check_keys(d, "discovery",
               {"tau_max", "alpha", "pc_alpha", "max_condition_size",
                "period_len", "clusters", "elbow", "dtw_band", "restarts",
                "max_cluster_size", "vote_mode", "strategy", "directed"});
    cfg.discover.discovery.tau_max = get_or<int>(d, "discovery", "tau_max", 1);
    cfg.discover.discovery.alpha = get_or<double>(d, "discovery", "alpha", 0.05);
    cfg.discover.discovery.pc_alpha =
        get_or<double>(d, "discovery", "pc_alpha", 0.0);
    cfg.discover.discovery.max_condition_size =
        get_or<int>(d, "discovery", "max_condition_size", 3);
    cfg.discover.period_len = get_or<int>(d, "discovery", "period_len", 0);
    cfg.discover.clusters = get_or<int>(d, "discovery", "clusters", 1);
    if (d.contains("elbow") && !d["elbow"].is_null()) {
      if (!d["elbow"].is_array() || d["elbow"].size() != 2)
        throw ConfigError("discovery.elbow: expected [min, max]");
      cfg.discover.elbow_min = d["elbow"][0].get<int>();
      cfg.discover.elbow_max = d["elbow"][1].get<int>();
    }
    if (d.contains("dtw_band") && !d["dtw_band"].is_null())
      cfg.discover.dtw_band = d["dtw_band"].get<int>();
    cfg.discover.cluster_restarts = get_or<int>(d, "discovery", "restarts", 5);
    cfg.discover.max_cluster_size =
        get_or<int>(d, "discovery", "max_cluster_size", 0);
    cfg.discover.vote_mode = vote_mode_from_string(
        get_or<std::string>(d, "discovery", "vote_mode", "any-lag"));
    cfg.discover.strategy = strategy_from_string(
        get_or<std::string>(d, "discovery", "strategy", "MT;W"));
    cfg.discover.directed = get_or<bool>(d, "discovery", "directed", true);
  }

  if (j.contains("forecast")) {
    const json& f = j["forecast"];
    check_keys(f, "forecast",
               {"history_len", "horizon", "stride", "kernel_width", "channels",
                "hidden", "hidden_out", "epochs", "batch_size", "learning_rate",
                "momentum", "train_frac", "val_frac", "adjacency", "tune"});
    cfg.forecast.window.history_len =
        get_or<int>(f, "forecast", "history_len", 8);
    cfg.forecast.window.horizon = get_or<int>(f, "forecast", "horizon", 1);
    cfg.forecast.window.stride = get_or<int>(f, "forecast", "stride", 1);
    cfg.forecast.kernel_width = get_or<int>(f, "forecast", "kernel_width", 3);
    cfg.forecast.channels = get_or<int>(f, "forecast", "channels", 16);
    cfg.forecast.hidden = get_or<int>(f, "forecast", "hidden", 16);
    cfg.forecast.hidden_out = get_or<int>(f, "forecast", "hidden_out", 8);
    cfg.forecast.train.epochs = get_or<int>(f, "forecast", "epochs", 50);
    cfg.forecast.train.batch_size = get_or<int>(f, "forecast", "batch_size", 32);
    cfg.forecast.train.learning_rate =
        get_or<double>(f, "forecast", "learning_rate", 0.05);
    cfg.forecast.train.momentum = get_or<double>(f, "forecast", "momentum", 0.0);
    cfg.forecast.train.train_frac =
        get_or<double>(f, "forecast", "train_frac", 0.7);
    cfg.forecast.train.val_frac = get_or<double>(f, "forecast", "val_frac", 0.1);
    cfg.forecast.adjacency =
        get_or<std::string>(f, "forecast", "adjacency", "discovered");
    if (f.contains("tune") && !f["tune"].is_null()) {
      const json& t = f["tune"];
      check_keys(t, "forecast.tune",
                 {"learning_rates", "batch_sizes", "channels", "hidden",
                  "hidden_out", "kernel_widths"});
      TuneSpace space;
      space.learning_rates =
          get_or<std::vector<double>>(t, "forecast.tune", "learning_rates", {});
      space.batch_sizes =
          get_or<std::vector<int>>(t, "forecast.tune", "batch_sizes", {});
      space.channels = get_or<std::vector<int>>(t, "forecast.tune", "channels", {});
      space.hidden = get_or<std::vector<int>>(t, "forecast.tune", "hidden", {});
      space.hidden_out =
          get_or<std::vector<int>>(t, "forecast.tune", "hidden_out", {});
      space.kernel_widths =
          get_or<std::vector<int>>(t, "forecast.tune", "kernel_widths", {});
      cfg.forecast.tune = space;
    }
  }

  if (j.contains("benchmark")) {
    const json& b = j["benchmark"];
    check_keys(b, "benchmark", {"repetitions"});
    cfg.benchmark.repetitions = get_or<int>(b, "benchmark", "repetitions", 3);
  }

  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  cfg.config_hash = hex;

  if (const char* env_dir = std::getenv("CTGCN_OUTPUT_DIR"); env_dir && *env_dir)
    cfg.output_dir = env_dir;
  if (const char* env_workers = std::getenv("CTGCN_WORKERS");
      env_workers && *env_workers) {
    char* end = nullptr;
    const long w = std::strtol(env_workers, &end, 10);
    if (!end || *end != '\0' || w < 1)
      throw ConfigError("CTGCN_WORKERS: expected a positive integer, got '" +
                        std::string(env_workers) + "'");
    cfg.workers = static_cast<int>(w);
  }

  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return pipeline_config_from_json(j);
}

std::uint64_t stage_seed(const PipelineConfig& cfg, const std::string& stage) {
  return derive_seed(cfg.seed, "stage-" + stage);
}

void stage_simulate(const PipelineConfig& cfg) {
  if (!cfg.simulate.enabled)
    throw ConfigError("simulate: no simulate section in the config");
  const Paths paths = paths_for(cfg);
  const std::uint64_t seed = stage_seed(cfg, "simulate");

  SyntheticData data;
  if (cfg.simulate.kind == "scm") {
    data = generate_scm_dataset(cfg.simulate.scm, cfg.simulate.n_samples, seed,
                                cfg.simulate.burn_in);
  } else {
    const int n = cfg.simulate.nodes;
    Matrix graph = Matrix::Zero(n, n);
    if (!cfg.simulate.graph_edges.empty()) {
      for (const auto& e : cfg.simulate.graph_edges) {
        const int a = static_cast<int>(e[0]);
        const int b = static_cast<int>(e[1]);
        if (a < 0 || a >= n || b < 0 || b >= n)
          throw ConfigError("simulate.graph_edges: endpoint out of range");
        graph(a, b) = e[2];
      }
    } else {
      Rng rng(derive_seed(seed, "graph"));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (a != b && rng.uniform() < cfg.simulate.graph_density)
            graph(a, b) = 1.0;
    }
    DiffusionSpec spec;
    spec.graph = graph;
    spec.rate = cfg.simulate.rate;
    spec.noise_std = cfg.simulate.noise_std;
    spec.leak = cfg.simulate.leak;
    data = generate_diffusion_dataset(spec, cfg.simulate.n_samples, seed,
                                      cfg.simulate.burn_in);
  }

  write_csv(data.dataset, paths.dataset());
  write_adjacency_json(data.truth, paths.truth());
  record_stage(cfg, "simulate", {paths.dataset(), paths.truth()});
}

void stage_cluster(const PipelineConfig& cfg) {
  const Paths paths = paths_for(cfg);
  const TimeSeriesDataset ds = resolve_dataset(cfg);

  ClusterOptions opts;
  opts.dtw.band = cfg.discover.dtw_band;
  opts.seed = stage_seed(cfg, "cluster");
  opts.restarts = cfg.discover.cluster_restarts;
  opts.max_cluster_size = cfg.discover.max_cluster_size;
  opts.workers = cfg.workers;

  int k = cfg.discover.clusters;
  std::vector<std::string> outputs;
  if (cfg.discover.elbow_min > 0) {
    const ElbowProfile profile =
        elbow_profile(ds, cfg.discover.elbow_min, cfg.discover.elbow_max, opts);
    k = profile.suggested_k;
    json ej;
    ej["suggested_k"] = profile.suggested_k;
    ej["points"] = json::array();
    for (const auto& p : profile.points)
      ej["points"].push_back({{"k", p.k}, {"inertia", p.inertia}});
    std::ofstream out(paths.elbow());
    if (!out) throw DataError("cannot write " + paths.elbow());
    out << ej.dump(2) << "\n";
    outputs.push_back(paths.elbow());
  }

  const Clustering clustering = cluster_features(ds, k, opts);
  write_clustering_json(clustering, ds.feature_names, paths.clustering());
  outputs.insert(outputs.begin(), paths.clustering());
  record_stage(cfg, "cluster", outputs);
}

void stage_discover(const PipelineConfig& cfg) {
  const Paths paths = paths_for(cfg);
  TimeSeriesDataset ds = resolve_dataset(cfg);
  if (cfg.dataset.normalize) ds = zscore_normalize(ds).first;

  const Clustering clustering = resolve_clustering(cfg, ds);
  const DecompositionPlan plan = plan_subproblems(
      ds, resolve_period_len(cfg, ds), clustering, cfg.discover.discovery);
  const DiscoveryRunResult run = execute_subproblems(plan, cfg.workers);
  write_discovery_results(run, paths.results(), paths.timings());
  record_stage(cfg, "discover", {paths.results(), paths.timings()});
}

void stage_aggregate(const PipelineConfig& cfg) {
  const Paths paths = paths_for(cfg);
  if (!fs::exists(paths.results()))
    throw StageError("no discovery results at " + paths.results() +
                     "; run the discover stage first");
  const DiscoveryRunResult run = load_discovery_results(paths.results());
  const VoteTensor votes = collect_votes(run, cfg.discover.vote_mode);
  CausalAdjacency adj = build_adjacency(votes, cfg.discover.strategy);
  if (!cfg.discover.directed) adj = to_undirected(adj);

  write_adjacency_json(adj, paths.adjacency());
  write_adjacency_csv(adj, paths.adjacency_csv());
  write_adjacency_dot(adj, paths.adjacency_dot());
  record_stage(cfg, "aggregate",
               {paths.adjacency(), paths.adjacency_csv(), paths.adjacency_dot()});
}

void stage_train(const PipelineConfig& cfg) {
  const Paths paths = paths_for(cfg);
  const TimeSeriesDataset raw = resolve_dataset(cfg);
  const auto [ds, stats] = normalized_for_model(cfg, raw);
  const NormalizedAdjacency adj =
      normalize_adjacency(resolve_model_adjacency(cfg, ds));

  ModelShape shape = shape_for(cfg, ds);
  TrainConfig train_cfg = cfg.forecast.train;
  train_cfg.seed = stage_seed(cfg, "train");

  if (cfg.forecast.tune) {
    const TuneOutcome tuned = tune_model(*cfg.forecast.tune, shape, train_cfg,
                                         adj, ds, cfg.forecast.window);
    shape = tuned.best.shape;
    train_cfg = tuned.best.config;
  }

  const CtgcnModel init = init_model(shape, derive_seed(train_cfg.seed, "init"));
  const TrainResult result =
      train_model(init, adj, ds, cfg.forecast.window, train_cfg);

  Checkpoint ckpt;
  ckpt.model = result.model;
  ckpt.adjacency_fingerprint = adj.fingerprint;
  ckpt.stats = stats;
  ckpt.window_spec = cfg.forecast.window;
  save_checkpoint(ckpt, paths.checkpoint());

  json trace;
  trace["best_epoch"] = result.best_epoch;
  trace["best_val_loss"] = result.best_val_loss;
  trace["test_loss"] = result.test_loss;
  trace["epochs"] = json::array();
  for (const auto& e : result.trace)
    trace["epochs"].push_back(
        {{"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  std::ofstream out(paths.trace());
  if (!out) throw DataError("cannot write " + paths.trace());
  out << trace.dump(2) << "\n";
  record_stage(cfg, "train", {paths.checkpoint(), paths.trace()});
}

void stage_forecast(const PipelineConfig& cfg) {
  const Paths paths = paths_for(cfg);
  if (!fs::exists(paths.checkpoint()))
    throw StageError("no checkpoint at " + paths.checkpoint() +
                     "; run the train stage first");
  const TimeSeriesDataset raw = resolve_dataset(cfg);
  const NormalizedAdjacency adj =
      normalize_adjacency(resolve_model_adjacency(cfg, raw));
  const Checkpoint ckpt = load_checkpoint(paths.checkpoint(), adj.fingerprint);
  const TimeSeriesDataset ds = apply_stats(raw, ckpt.stats);

  const int history = ckpt.window_spec.history_len;
  if (ds.n_samples() < history)
    throw InsufficientDataError("dataset has " +
                                std::to_string(ds.n_samples()) +
                                " samples, model needs " +
                                std::to_string(history));
  const Matrix input = ds.values.rightCols(history);
  const Matrix forecast = ctgcn_forward(ckpt.model, adj, input);

  TimeSeriesDataset out;
  out.feature_names = ds.feature_names;
  out.sample_interval = ds.sample_interval;
  out.values = denormalize_block(forecast, ckpt.stats);
  write_csv(out, paths.forecasts());
  record_stage(cfg, "forecast", {paths.forecasts()});
}

void stage_evaluate(const PipelineConfig& cfg) {
  const Paths paths = paths_for(cfg);
  if (!fs::exists(paths.checkpoint()))
    throw StageError("no checkpoint at " + paths.checkpoint() +
                     "; run the train stage first");
  const TimeSeriesDataset raw = resolve_dataset(cfg);
  const NormalizedAdjacency adj =
      normalize_adjacency(resolve_model_adjacency(cfg, raw));
  const Checkpoint ckpt = load_checkpoint(paths.checkpoint(), adj.fingerprint);
  const TimeSeriesDataset ds = apply_stats(raw, ckpt.stats);

  const auto windows = make_windows(ds, ckpt.window_spec);
  const SplitWindows splits =
      split_windows_chronological(windows, cfg.forecast.train);

  double sse_norm = 0.0, sse_orig = 0.0;
  long long count = 0;
  for (const Window& w : splits.test) {
    const Matrix y = ctgcn_forward(ckpt.model, adj, window_input(ds, w, ckpt.window_spec));
    const Matrix t = window_target(ds, w, ckpt.window_spec);
    sse_norm += (y - t).squaredNorm();
    sse_orig += (denormalize_block(y, ckpt.stats) - denormalize_block(t, ckpt.stats))
                    .squaredNorm();
    count += y.size();
  }
  const double rmse_norm = std::sqrt(sse_norm / count);
  const double rmse_orig = std::sqrt(sse_orig / count);

  json ev;
  ev["test_windows"] = static_cast<int>(splits.test.size());
  ev["rmse_normalized"] = rmse_norm;
  ev["rmse_original"] = rmse_orig;

  std::ostringstream report;
  report << "evaluation over " << splits.test.size() << " test windows\n"
         << "  rmse (normalized scale): " << rmse_norm << "\n"
         << "  rmse (original scale):   " << rmse_orig << "\n";

  if (fs::exists(paths.adjacency()) && fs::exists(paths.truth())) {
    CausalAdjacency predicted = load_adjacency_json(paths.adjacency());
    CausalAdjacency truth = load_adjacency_json(paths.truth());
    if (!predicted.directed) truth = to_undirected(truth);
    const GraphScore score = adjacency_scores(predicted, truth);
    ev["graph"] = {{"tp", score.tp},       {"fp", score.fp},
                   {"fn", score.fn},       {"tn", score.tn},
                   {"precision", score.precision}, {"recall", score.recall},
                   {"accuracy", score.accuracy},   {"f1", score.f1}};
    report << "graph recovery vs ground truth\n"
           << "  precision " << score.precision << ", recall " << score.recall
           << ", accuracy " << score.accuracy << ", f1 " << score.f1 << "\n";
  }

  std::ofstream out(paths.evaluation());
  if (!out) throw DataError("cannot write " + paths.evaluation());
  out << ev.dump(2) << "\n";
  std::ofstream rep(paths.report());
  if (!rep) throw DataError("cannot write " + paths.report());
  rep << report.str();
  record_stage(cfg, "evaluate", {paths.evaluation(), paths.report()});
}

void stage_benchmark(const PipelineConfig& cfg) {
  const Paths paths = paths_for(cfg);
  if (!spatial_decomposition_on(cfg))
    throw ConfigError(
        "benchmark: needs discovery.clusters > 1 (or an elbow range) to "
        "compare against the temporal-only baseline");
  TimeSeriesDataset ds = resolve_dataset(cfg);
  if (cfg.dataset.normalize) ds = zscore_normalize(ds).first;
  const Clustering clustering = resolve_clustering(cfg, ds);

  const BenchmarkReport report = benchmark_decomposition(
      ds, resolve_period_len(cfg, ds), clustering, cfg.discover.discovery,
      cfg.benchmark.repetitions, cfg.workers);

  json bj;
  bj["repetitions"] = report.repetitions;
  bj["baseline_seconds"] = report.baseline_seconds;
  bj["decomposed_seconds"] = report.decomposed_seconds;
  bj["speedup"] = report.speedup;
  bj["baseline_subproblems"] = report.baseline_subproblems;
  bj["decomposed_subproblems"] = report.decomposed_subproblems;
  std::ofstream out(paths.benchmark_json());
  if (!out) throw DataError("cannot write " + paths.benchmark_json());
  out << bj.dump(2) << "\n";
  std::ofstream text(paths.benchmark_text());
  if (!text) throw DataError("cannot write " + paths.benchmark_text());
  text << benchmark_report_text(report);
  record_stage(cfg, "benchmark", {paths.benchmark_json(), paths.benchmark_text()});
}

void run_pipeline(const PipelineConfig& cfg) {
  if (cfg.simulate.enabled) stage_simulate(cfg);
  if (spatial_decomposition_on(cfg)) stage_cluster(cfg);
  stage_discover(cfg);
  stage_aggregate(cfg);
  stage_train(cfg);
  stage_forecast(cfg);
  stage_evaluate(cfg);
}

}  // namespace ctgcn
