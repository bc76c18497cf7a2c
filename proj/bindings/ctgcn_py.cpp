// Python bindings for the headline operations: dataset IO, synthetic
// generators, warped-distance clustering, causal discovery, aggregation,
// and the graph-convolutional forecaster.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctgcn/aggregate.hpp"
#include "ctgcn/decompose.hpp"
#include "ctgcn/dtw.hpp"
#include "ctgcn/metrics.hpp"
#include "ctgcn/model.hpp"
#include "ctgcn/pcmci.hpp"
#include "ctgcn/pipeline.hpp"
#include "ctgcn/rng.hpp"
#include "ctgcn/synthgen.hpp"
#include "ctgcn/timeseries.hpp"

namespace py = pybind11;
using namespace ctgcn;

namespace {

Clustering clustering_from_assignment(const std::vector<int>& assignment) {
  Clustering c;
  c.assignment = assignment;
  int k = 0;
  for (const int a : assignment) k = std::max(k, a + 1);
  c.medoids.assign(k, -1);
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i)
    if (c.medoids[assignment[i]] < 0) c.medoids[assignment[i]] = i;
  for (const int m : c.medoids)
    if (m < 0) throw ConfigError("assignment: cluster ids must be contiguous");
  return c;
}

CausalAdjacency discover(const TimeSeriesDataset& ds, int tau_max, double alpha,
                         double pc_alpha, int max_condition_size, int period_len,
                         const std::optional<std::vector<int>>& assignment,
                         const std::string& vote_mode, const std::string& strategy,
                         int workers) {
  DiscoveryConfig cfg;
  cfg.tau_max = tau_max;
  cfg.alpha = alpha;
  cfg.pc_alpha = pc_alpha;
  cfg.max_condition_size = max_condition_size;
  const Clustering clusters = assignment
                                  ? clustering_from_assignment(*assignment)
                                  : trivial_clustering(ds.n_features());
  const int period = period_len > 0 ? period_len : ds.n_samples();
  const DecompositionPlan plan = plan_subproblems(ds, period, clusters, cfg);
  const DiscoveryRunResult run = execute_subproblems(plan, workers);
  return build_adjacency(collect_votes(run, vote_mode_from_string(vote_mode)),
                         strategy_from_string(strategy));
}

py::dict train_forecaster(const TimeSeriesDataset& ds, const CausalAdjacency& adj,
                          int history_len, int horizon, int kernel_width,
                          int channels, int hidden, int hidden_out, int epochs,
                          int batch_size, double learning_rate, double momentum,
                          double train_frac, double val_frac, std::uint64_t seed) {
  ModelShape shape;
  shape.n_nodes = ds.n_features();
  shape.history_len = history_len;
  shape.horizon = horizon;
  shape.kernel_width = kernel_width;
  shape.channels = channels;
  shape.hidden = hidden;
  shape.hidden_out = hidden_out;

  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.learning_rate = learning_rate;
  cfg.momentum = momentum;
  cfg.train_frac = train_frac;
  cfg.val_frac = val_frac;
  cfg.seed = derive_seed(seed, "train");

  const NormalizedAdjacency na = normalize_adjacency(adj);
  const WindowSpec spec{history_len, horizon, 1};
  const CtgcnModel init = init_model(shape, derive_seed(seed, "init"));
  const TrainResult result = train_model(init, na, ds, spec, cfg);

  std::vector<double> train_losses, val_losses;
  for (const EpochStats& e : result.trace) {
    train_losses.push_back(e.train_loss);
    val_losses.push_back(e.val_loss);
  }
  const Matrix forecast =
      ctgcn_forward(result.model, na, ds.values.rightCols(history_len));

  py::dict out;
  out["best_epoch"] = result.best_epoch;
  out["best_val_loss"] = result.best_val_loss;
  out["test_loss"] = result.test_loss;
  out["train_losses"] = train_losses;
  out["val_losses"] = val_losses;
  out["forecast"] = forecast;
  return out;
}

py::dict score_dict(const GraphScore& s) {
  py::dict out;
  out["tp"] = s.tp;
  out["fp"] = s.fp;
  out["fn"] = s.fn;
  out["tn"] = s.tn;
  out["precision"] = s.precision;
  out["recall"] = s.recall;
  out["accuracy"] = s.accuracy;
  out["f1"] = s.f1;
  return out;
}

}  // namespace

PYBIND11_MODULE(_ctgcn, m) {
  m.doc() = "causal discovery and graph-convolutional forecasting";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError",
                                                PyExc_ValueError);
  py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

  py::class_<TimeSeriesDataset>(m, "TimeSeriesDataset")
      .def(py::init([](std::vector<std::string> names, Matrix values,
                       double interval) {
             TimeSeriesDataset ds;
             ds.feature_names = std::move(names);
             ds.values = std::move(values);
             ds.sample_interval = interval;
             validate_dataset(ds);
             return ds;
           }),
           py::arg("feature_names"), py::arg("values"),
           py::arg("sample_interval") = 1.0)
      .def_readwrite("feature_names", &TimeSeriesDataset::feature_names)
      .def_readwrite("values", &TimeSeriesDataset::values)
      .def_readwrite("sample_interval", &TimeSeriesDataset::sample_interval)
      .def_property_readonly("n_features", &TimeSeriesDataset::n_features)
      .def_property_readonly("n_samples", &TimeSeriesDataset::n_samples);

  py::class_<NormalizationStats>(m, "NormalizationStats")
      .def_readonly("mean", &NormalizationStats::mean)
      .def_readonly("stddev", &NormalizationStats::stddev);

  py::class_<CausalAdjacency>(m, "CausalAdjacency")
      .def(py::init([](std::vector<std::string> names, Matrix weights,
                       bool directed) {
             CausalAdjacency adj;
             adj.feature_names = std::move(names);
             adj.weights = std::move(weights);
             adj.directed = directed;
             validate_adjacency(adj);
             return adj;
           }),
           py::arg("feature_names"), py::arg("weights"),
           py::arg("directed") = true)
      .def_readwrite("feature_names", &CausalAdjacency::feature_names)
      .def_readwrite("weights", &CausalAdjacency::weights)
      .def_readwrite("directed", &CausalAdjacency::directed);

  py::class_<Clustering>(m, "Clustering")
      .def_readonly("assignment", &Clustering::assignment)
      .def_readonly("medoids", &Clustering::medoids)
      .def_readonly("inertia", &Clustering::inertia);

  m.def("load_csv",
        [](const std::string& path, char delimiter, bool timestamp_column) {
          return load_csv(path, {delimiter, timestamp_column});
        },
        py::arg("path"), py::arg("delimiter") = ',',
        py::arg("timestamp_column") = true);
  m.def("write_csv",
        [](const TimeSeriesDataset& ds, const std::string& path) {
          write_csv(ds, path);
        },
        py::arg("dataset"), py::arg("path"));
  m.def("zscore_normalize", &zscore_normalize, py::arg("dataset"));

  m.def("generate_scm",
        [](int n_features,
           const std::vector<std::tuple<int, int, int, double>>& edges,
           int n_samples, std::uint64_t seed, int burn_in) {
          ScmSpec spec;
          spec.n_features = n_features;
          for (const auto& [src, dst, lag, coeff] : edges)
            spec.edges.push_back({src, dst, lag, coeff});
          const SyntheticData data =
              generate_scm_dataset(spec, n_samples, seed, burn_in);
          return std::make_pair(data.dataset, data.truth);
        },
        py::arg("n_features"), py::arg("edges"), py::arg("n_samples"),
        py::arg("seed") = 0, py::arg("burn_in") = 500);

  m.def("generate_diffusion",
        [](const Matrix& graph, double rate, double noise_std, double leak,
           int n_samples, std::uint64_t seed, int burn_in) {
          DiffusionSpec spec;
          spec.graph = graph;
          spec.rate = rate;
          spec.noise_std = noise_std;
          spec.leak = leak;
          const SyntheticData data =
              generate_diffusion_dataset(spec, n_samples, seed, burn_in);
          return std::make_pair(data.dataset, data.truth);
        },
        py::arg("graph"), py::arg("rate") = 0.3, py::arg("noise_std") = 0.1,
        py::arg("leak") = 0.05, py::arg("n_samples") = 2000,
        py::arg("seed") = 0, py::arg("burn_in") = 500);

  m.def("dtw_distance",
        [](const std::vector<double>& a, const std::vector<double>& b,
           std::optional<int> band) {
          DtwConfig cfg;
          cfg.band = band;
          return dtw_distance(a, b, cfg);
        },
        py::arg("a"), py::arg("b"), py::arg("band") = std::nullopt);

  m.def("cluster_features",
        [](const TimeSeriesDataset& ds, int n_clusters, std::optional<int> band,
           std::uint64_t seed, int restarts, int max_cluster_size, int workers) {
          ClusterOptions opts;
          opts.dtw.band = band;
          opts.seed = seed;
          opts.restarts = restarts;
          opts.max_cluster_size = max_cluster_size;
          opts.workers = workers;
          return cluster_features(ds, n_clusters, opts);
        },
        py::arg("dataset"), py::arg("n_clusters"),
        py::arg("band") = std::nullopt, py::arg("seed") = 0,
        py::arg("restarts") = 5, py::arg("max_cluster_size") = 0,
        py::arg("workers") = 1);

  m.def("discover", &discover, py::arg("dataset"), py::arg("tau_max") = 1,
        py::arg("alpha") = 0.05, py::arg("pc_alpha") = 0.0,
        py::arg("max_condition_size") = 3, py::arg("period_len") = 0,
        py::arg("assignment") = std::nullopt, py::arg("vote_mode") = "any-lag",
        py::arg("strategy") = "MT;W", py::arg("workers") = 1);

  m.def("distance_adjacency",
        [](const Matrix& distances, const std::vector<std::string>& names,
           double variance, double threshold) {
          return distance_adjacency(distances, names, variance, threshold);
        },
        py::arg("distances"), py::arg("names"), py::arg("variance"),
        py::arg("threshold"));

  m.def("to_undirected", &to_undirected, py::arg("adjacency"));

  m.def("adjacency_scores",
        [](const CausalAdjacency& predicted, const CausalAdjacency& truth) {
          return score_dict(adjacency_scores(predicted, truth));
        },
        py::arg("predicted"), py::arg("truth"));

  m.def("train_forecaster", &train_forecaster, py::arg("dataset"),
        py::arg("adjacency"), py::arg("history_len") = 8, py::arg("horizon") = 1,
        py::arg("kernel_width") = 3, py::arg("channels") = 16,
        py::arg("hidden") = 16, py::arg("hidden_out") = 8,
        py::arg("epochs") = 50, py::arg("batch_size") = 32,
        py::arg("learning_rate") = 0.05, py::arg("momentum") = 0.0,
        py::arg("train_frac") = 0.7, py::arg("val_frac") = 0.1,
        py::arg("seed") = 0);

  m.def("run_pipeline",
        [](const std::string& config_json) {
          run_pipeline(pipeline_config_from_json(nlohmann::json::parse(config_json)));
        },
        py::arg("config_json"),
        "Run every configured stage from a JSON config document.");
}
