// Acceptance suite: ten scripted gates over discovery, aggregation,
// clustering, and the forecaster. Each check prints one [PASS]/[FAIL] line
// with its evidence; the process exits nonzero when any gate fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctgcn/aggregate.hpp"
#include "ctgcn/decompose.hpp"
#include "ctgcn/dtw.hpp"
#include "ctgcn/metrics.hpp"
#include "ctgcn/model.hpp"
#include "ctgcn/pcmci.hpp"
#include "ctgcn/rng.hpp"
#include "ctgcn/synthgen.hpp"
#include "ctgcn/timeseries.hpp"

using namespace ctgcn;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kRoot = 20260819ull;

struct Check {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Discovery over consecutive periods and the given feature clustering,
// collapsed to one adjacency.
CausalAdjacency discover_adjacency(const TimeSeriesDataset& ds,
                                   const DiscoveryConfig& cfg, int period_len,
                                   const Clustering& clustering, VoteMode mode,
                                   AggregationStrategy strategy,
                                   int workers = 1) {
  const DecompositionPlan plan = plan_subproblems(ds, period_len, clustering, cfg);
  const DiscoveryRunResult run = execute_subproblems(plan, workers);
  return build_adjacency(collect_votes(run, mode), strategy);
}

// Random stable SCM with `n_edges` distinct lagged cross edges.
ScmSpec random_lagged_scm(int n_features, int n_edges, int max_lag, Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    ScmSpec spec;
    spec.n_features = n_features;
    std::set<std::pair<int, int>> used;
    while (static_cast<int>(spec.edges.size()) < n_edges) {
      const int src = static_cast<int>(rng.below(n_features));
      const int dst = static_cast<int>(rng.below(n_features));
      if (src == dst || used.count({src, dst})) continue;
      used.insert({src, dst});
      ScmEdge e;
      e.src = src;
      e.dst = dst;
      e.lag = 1 + static_cast<int>(rng.below(max_lag));
      e.coeff = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(0.4, 0.8);
      spec.edges.push_back(e);
    }
    if (scm_spectral_radius(spec) < 0.9) return spec;
  }
  throw std::runtime_error("no stable edge draw in 200 attempts");
}

// Four hubs, each driving seven followers at lag 1; every node keeps a weak
// autoregressive term. All causal structure stays inside a block.
ScmSpec block_hub_scm(int n_blocks, int block_size) {
  ScmSpec spec;
  spec.n_features = n_blocks * block_size;
  for (int b = 0; b < n_blocks; ++b) {
    const int hub = b * block_size;
    for (int m = 1; m < block_size; ++m)
      spec.edges.push_back({hub, hub + m, 1, 0.7});
  }
  for (int i = 0; i < spec.n_features; ++i)
    spec.edges.push_back({i, i, 1, 0.3});
  return spec;
}

// Random perfect matching for the diffusion generator. Disjoint pairs are
// the regime where a graph layer with shared weights genuinely helps:
// averaging a pair isolates the common driver exactly, which a per-node
// model must instead estimate from one noisy series.
Matrix random_matching(int n, Rng& rng) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[static_cast<int>(rng.below(i + 1))]);
  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; i += 2) {
    g(order[i], order[i + 1]) = 1.0;
    g(order[i + 1], order[i]) = 1.0;
  }
  return g;
}

CausalAdjacency zero_adjacency(const std::vector<std::string>& names) {
  CausalAdjacency adj;
  adj.feature_names = names;
  adj.weights = Matrix::Zero(static_cast<int>(names.size()),
                             static_cast<int>(names.size()));
  adj.directed = true;
  return adj;
}

// Shared forecaster fit for the ordering checks: same init and batch
// schedule for every candidate adjacency, so only the graph differs.
double fit_test_rmse(const CausalAdjacency& adj, const TimeSeriesDataset& ds,
                     std::uint64_t seed) {
  ModelShape shape;
  shape.n_nodes = ds.n_features();
  shape.history_len = 8;
  shape.horizon = 1;
  shape.kernel_width = 3;
  shape.channels = 8;
  shape.hidden = 8;
  shape.hidden_out = 4;
  WindowSpec wspec{8, 1, 1};
  TrainConfig tc;
  tc.epochs = 15;
  tc.batch_size = 32;
  tc.learning_rate = 0.05;
  tc.momentum = 0.9;
  tc.seed = derive_seed(seed, "fit");
  const CtgcnModel init = init_model(shape, derive_seed(seed, "init"));
  return train_model(init, normalize_adjacency(adj), ds, wspec, tc).test_loss;
}

// 1. Lagged-edge recovery on random stable models. Directed-edge F1 scores
// the directed claims the discovery makes: lagged links plus oriented
// contemporaneous links. Unoriented contemporaneous links are Markov
//-equivalence ties, not directed edges, so they stay out of both sides.
Check criterion_recovery() {
  const auto start = std::chrono::steady_clock::now();
  DiscoveryConfig cfg;
  cfg.tau_max = 3;
  cfg.alpha = 0.01;
  int hits = 0;
  for (int s = 0; s < 10; ++s) {
    Rng rng(derive_seed(kRoot, "c1-spec-" + std::to_string(s)));
    const ScmSpec spec = random_lagged_scm(8, 5, 3, rng);
    const SyntheticData data =
        generate_scm_dataset(spec, 2000, derive_seed(kRoot, "c1-data-" + std::to_string(s)));
    const TimeSeriesDataset ds = zscore_normalize(data.dataset).first;
    const CausalTestResults res = discover_full_graph(ds, cfg);
    std::set<std::pair<int, int>> predicted;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        if (i == j) continue;
        bool directed = false;
        for (int lag = 1; lag <= cfg.tau_max; ++lag)
          if (res.at(i, j, lag).present) directed = true;
        if (res.at(i, j, 0).present &&
            res.orientation(i, j) == Orientation::kForward)
          directed = true;
        if (directed) predicted.insert({i, j});
      }
    std::set<std::pair<int, int>> truth;
    for (const auto& e : spec.edges) truth.insert({e.src, e.dst});
    int tp = 0;
    for (const auto& p : predicted) tp += truth.count(p) ? 1 : 0;
    const int fp = static_cast<int>(predicted.size()) - tp;
    const int fn = static_cast<int>(truth.size()) - tp;
    const double f1 = 2.0 * tp / (2.0 * tp + fp + fn);
    if (f1 >= 0.8) ++hits;
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << hits << "/10 seeds with F1 >= 0.8 in " << elapsed << "s";
  return {hits >= 8 && elapsed < 300.0, detail.str()};
}

// 2. False-positive rate on independent noise.
Check criterion_false_positives() {
  DiscoveryConfig cfg;
  cfg.tau_max = 3;
  cfg.alpha = 0.001;
  int total_edges = 0;
  for (int s = 0; s < 20; ++s) {
    ScmSpec spec;
    spec.n_features = 5;
    const SyntheticData data =
        generate_scm_dataset(spec, 1000, derive_seed(kRoot, "c2-" + std::to_string(s)));
    const TimeSeriesDataset ds = zscore_normalize(data.dataset).first;
    const CausalAdjacency adj =
        discover_adjacency(ds, cfg, ds.n_samples(), trivial_clustering(5),
                           VoteMode::kAnyLag, AggregationStrategy::kAnyWeighted);
    total_edges += static_cast<int>((adj.weights.array() != 0.0).count());
  }
  const double mean_edges = total_edges / 20.0;
  std::ostringstream detail;
  detail << "mean " << mean_edges << " edges over 20 white-noise runs";
  return {mean_edges <= 1.0, detail.str()};
}

// 3. Strategy lattice vs a plain-loop reference on random vote tensors.
Check criterion_aggregation_oracle() {
  Rng rng(derive_seed(kRoot, "c3"));
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(9));
    const int periods = 1 + static_cast<int>(rng.below(5));
    const int sets_per_period = 1 + static_cast<int>(rng.below(4));

    VoteTensor votes;
    votes.n_periods = periods;
    for (int f = 0; f < n; ++f)
      votes.feature_names.push_back("x" + std::to_string(f));
    for (int p = 0; p < periods; ++p)
      for (int c = 0; c < sets_per_period; ++c) {
        VoteMatrix vm;
        vm.period_index = p;
        vm.cluster_id = c;
        vm.votes = Eigen::MatrixXi::Zero(n, n);
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            if (j != k && rng.uniform() < 0.4) vm.votes(j, k) = 1;
        votes.sets.push_back(vm);
      }

    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, n);
    for (const VoteMatrix& vm : votes.sets) counts += vm.votes;

    for (const auto strategy :
         {AggregationStrategy::kAnyWeighted, AggregationStrategy::kMajorityWeighted,
          AggregationStrategy::kAnyUnweighted,
          AggregationStrategy::kMajorityUnweighted}) {
      const Matrix got = build_adjacency(votes, strategy).weights;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const int c = counts(j, k);
          const bool majority = 2 * c > periods;
          double want = 0.0;
          switch (strategy) {
            case AggregationStrategy::kAnyWeighted: want = c; break;
            case AggregationStrategy::kMajorityWeighted: want = majority ? c : 0; break;
            case AggregationStrategy::kAnyUnweighted: want = c > 0 ? 1 : 0; break;
            case AggregationStrategy::kMajorityUnweighted: want = majority ? 1 : 0; break;
          }
          if (j == k) want = 0.0;
          if (got(j, k) != want) {
            std::ostringstream detail;
            detail << "trial " << trial << " " << to_string(strategy) << " ("
                   << j << "," << k << "): got " << got(j, k) << ", want "
                   << want;
            return {false, detail.str()};
          }
        }
    }
  }
  return {true, "4 strategies x 1000 tensors match the reference exactly"};
}

// 4. Spatiotemporal decomposition: faster than temporal-only, and no
// material recall loss on within-block edges.
Check criterion_decomposition() {
  const ScmSpec spec = block_hub_scm(4, 8);
  const SyntheticData data =
      generate_scm_dataset(spec, 4000, derive_seed(kRoot, "c4-data"));
  const TimeSeriesDataset ds = zscore_normalize(data.dataset).first;

  ClusterOptions copts;
  copts.dtw.band = 50;
  copts.seed = derive_seed(kRoot, "c4-cluster");
  const Clustering clusters = cluster_features(ds, 4, copts);

  DiscoveryConfig cfg;
  cfg.tau_max = 2;
  cfg.alpha = 0.01;

  const auto run_arm = [&](const Clustering& arm) {
    const auto start = std::chrono::steady_clock::now();
    const DecompositionPlan plan = plan_subproblems(ds, 1000, arm, cfg);
    const DiscoveryRunResult run = execute_subproblems(plan, 1);
    const double wall = seconds_since(start);
    const CausalAdjacency adj = build_adjacency(
        collect_votes(run, VoteMode::kAnyLag), AggregationStrategy::kAnyWeighted);
    return std::make_pair(wall, adjacency_scores(adj, data.truth).recall);
  };

  const auto [wall_mono, recall_mono] = run_arm(trivial_clustering(32));
  const auto [wall_dec, recall_dec] = run_arm(clusters);

  std::ostringstream detail;
  detail << "wall " << wall_dec << "s vs " << wall_mono << "s (ratio "
         << wall_dec / wall_mono << "), recall " << recall_dec << " vs "
         << recall_mono;
  return {wall_dec <= 0.5 * wall_mono && recall_dec >= recall_mono - 0.05,
          detail.str()};
}

// 5. Analytic gradients against central finite differences.
Check criterion_gradients() {
  Rng rng(derive_seed(kRoot, "c5"));
  ModelShape shape;
  shape.n_nodes = 3;
  shape.history_len = 4;
  shape.horizon = 2;
  shape.kernel_width = 2;
  shape.channels = 3;
  shape.hidden = 4;
  shape.hidden_out = 3;

  CtgcnModel model = init_model(shape, derive_seed(kRoot, "c5-init"));
  Matrix raw = Matrix::Zero(3, 3);
  raw(0, 1) = raw(1, 0) = 1.0;
  raw(1, 2) = raw(2, 1) = 1.0;
  const NormalizedAdjacency adj = normalize_adjacency(raw);

  TimeSeriesDataset ds;
  ds.feature_names = {"a", "b", "c"};
  ds.values = Matrix::Zero(3, 30);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 30; ++t) ds.values(i, t) = rng.normal();

  const WindowSpec wspec{4, 2, 1};
  const std::vector<Window> all = make_windows(ds, wspec);
  const std::vector<Window> batch(all.begin(), all.begin() + 6);

  const LossGrads lg = loss_and_grads(model, adj, ds, batch, wspec);

  struct Block {
    double* params;
    const double* grads;
    long size;
  };
  Gradients g = lg.grads;
  const std::vector<Block> blocks = {
      {model.conv_kernel.data(), g.conv_kernel.data(), model.conv_kernel.size()},
      {model.conv_bias.data(), g.conv_bias.data(), model.conv_bias.size()},
      {model.w0.data(), g.w0.data(), model.w0.size()},
      {model.w1.data(), g.w1.data(), model.w1.size()},
      {model.head_w.data(), g.head_w.data(), model.head_w.size()},
      {model.head_b.data(), g.head_b.data(), model.head_b.size()},
  };

  const double step = 1e-5;
  double worst = 0.0;
  long checked = 0;
  for (const Block& b : blocks)
    for (long i = 0; i < b.size; ++i) {
      const double saved = b.params[i];
      b.params[i] = saved + step;
      const double up = loss_and_grads(model, adj, ds, batch, wspec).loss;
      b.params[i] = saved - step;
      const double down = loss_and_grads(model, adj, ds, batch, wspec).loss;
      b.params[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double an = b.grads[i];
      const double rel =
          std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
      worst = std::max(worst, rel);
      ++checked;
    }

  std::ostringstream detail;
  detail << checked << " parameters, worst relative error " << worst;
  return {worst <= 1e-4, detail.str()};
}

// Shared by checks 6 and 7: discovery on a diffusion dataset.
CausalAdjacency discovered_mt(const TimeSeriesDataset& ds,
                              AggregationStrategy strategy) {
  DiscoveryConfig cfg;
  cfg.tau_max = 2;
  cfg.alpha = 0.01;
  return discover_adjacency(ds, cfg, 400, trivial_clustering(ds.n_features()),
                            VoteMode::kAnyLag, strategy);
}

// 6. Forecast error ordering: true graph < no graph; weighted majority no
// worse than unweighted within 2%.
Check criterion_forecast_ordering() {
  int hits_truth = 0;
  int hits_weighted = 0;
  for (int s = 0; s < 10; ++s) {
    Rng rng(derive_seed(kRoot, "c6-graph-" + std::to_string(s)));
    DiffusionSpec spec;
    spec.graph = random_matching(20, rng);
    spec.rate = 0.3;
    const SyntheticData data = generate_diffusion_dataset(
        spec, 1200, derive_seed(kRoot, "c6-data-" + std::to_string(s)));
    const TimeSeriesDataset ds = zscore_normalize(data.dataset).first;

    const std::uint64_t fit_seed = derive_seed(kRoot, "c6-fit-" + std::to_string(s));
    const double rmse_truth = fit_test_rmse(data.truth, ds, fit_seed);
    const double rmse_zero =
        fit_test_rmse(zero_adjacency(ds.feature_names), ds, fit_seed);
    const double rmse_weighted = fit_test_rmse(
        discovered_mt(ds, AggregationStrategy::kMajorityWeighted), ds, fit_seed);
    const double rmse_unweighted = fit_test_rmse(
        discovered_mt(ds, AggregationStrategy::kMajorityUnweighted), ds, fit_seed);

    if (rmse_truth < rmse_zero) ++hits_truth;
    if (rmse_weighted <= rmse_unweighted * 1.02) ++hits_weighted;
  }
  std::ostringstream detail;
  detail << "truth < zero in " << hits_truth
         << "/10, weighted <= 1.02x unweighted in " << hits_weighted << "/10";
  return {hits_truth >= 8 && hits_weighted >= 8, detail.str()};
}

// 7. Discovered adjacency vs a distance kernel from a planted layout that is
// unrelated to the causal wiring.
Check criterion_distance_benchmark() {
  int hits = 0;
  std::ostringstream ratios;
  for (int s = 0; s < 10; ++s) {
    Rng rng(derive_seed(kRoot, "c7-" + std::to_string(s)));
    const int n = 20;
    std::vector<std::pair<double, double>> pos(n);
    for (auto& p : pos) p = {rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)};
    Matrix dist = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dist(i, j) = std::hypot(pos[i].first - pos[j].first,
                                pos[i].second - pos[j].second);

    DiffusionSpec spec;
    spec.graph = random_matching(n, rng);
    spec.rate = 0.3;
    const SyntheticData data = generate_diffusion_dataset(
        spec, 1200, derive_seed(kRoot, "c7-data-" + std::to_string(s)));
    const TimeSeriesDataset ds = zscore_normalize(data.dataset).first;

    const std::uint64_t fit_seed = derive_seed(kRoot, "c7-fit-" + std::to_string(s));
    const double rmse_disc = fit_test_rmse(
        discovered_mt(ds, AggregationStrategy::kMajorityWeighted), ds, fit_seed);
    const double rmse_dist = fit_test_rmse(
        distance_adjacency(dist, ds.feature_names, 10.0, 0.5), ds, fit_seed);
    if (rmse_disc <= 0.9 * rmse_dist) ++hits;
    ratios << (s ? " " : "") << rmse_disc / rmse_dist;
  }
  std::ostringstream detail;
  detail << hits << "/10 seeds with >= 10% lower RMSE (ratios " << ratios.str()
         << ")";
  return {hits >= 7, detail.str()};
}

// 8. Distance kernel against its closed form, boundary entries included.
Check criterion_distance_closed_form() {
  Rng rng(derive_seed(kRoot, "c8"));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(11));
    const double variance = rng.uniform(0.5, 20.0);
    const double threshold = rng.uniform(0.05, 0.95);
    const double boundary = std::sqrt(variance * std::log(1.0 / threshold));

    Matrix dist = Matrix::Zero(n, n);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d =
            rng.uniform() < 0.15 ? boundary : rng.uniform(0.0, 4.0);
        dist(i, j) = dist(j, i) = d;
      }

    const Matrix got = distance_adjacency(dist, names, variance, threshold).weights;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double want = 0.0;
        if (i != j) {
          const double w = std::exp(-(dist(i, j) * dist(i, j)) / variance);
          want = w >= threshold ? w : 0.0;
        }
        worst = std::max(worst, std::abs(got(i, j) - want));
      }
  }
  std::ostringstream detail;
  detail << "100 matrices, worst deviation " << worst;
  return {worst <= 1e-15, detail.str()};
}

// 9. Warping distance properties on a randomized corpus.
Check criterion_dtw_properties() {
  Rng rng(derive_seed(kRoot, "c9"));
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(40));
    const int n = 1 + static_cast<int>(rng.below(40));
    std::vector<double> a(m), b(n);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal();

    const double ab = dtw_distance(a, b);
    const double ba = dtw_distance(b, a);
    if (!(ab >= 0.0) || std::abs(ab - ba) > 1e-9 * std::max(1.0, std::abs(ab))) {
      std::ostringstream detail;
      detail << "trial " << trial << ": d(a,b)=" << ab << " d(b,a)=" << ba;
      return {false, detail.str()};
    }
    if (dtw_distance(a, a) != 0.0)
      return {false, "nonzero self distance at trial " + std::to_string(trial)};
  }
  const std::vector<double> one{1, 2, 3};
  const std::vector<double> many{1, 1, 2, 2, 3, 3};
  if (dtw_distance(one, many) != 0.0)
    return {false, "one-to-many alignment of equal values is not free"};
  return {true, "symmetry, non-negativity, and zero cases hold on 200 draws"};
}

// 10. Worker-count invariance of discovery artifacts, and rerun-identical
// training traces.
Check criterion_determinism() {
  const ScmSpec spec = block_hub_scm(2, 4);
  const SyntheticData data =
      generate_scm_dataset(spec, 1200, derive_seed(kRoot, "c10-data"));
  const TimeSeriesDataset ds = zscore_normalize(data.dataset).first;

  Clustering planted;
  planted.assignment = {0, 0, 0, 0, 1, 1, 1, 1};
  planted.medoids = {0, 4};

  DiscoveryConfig cfg;
  cfg.tau_max = 2;
  cfg.alpha = 0.01;
  const DecompositionPlan plan = plan_subproblems(ds, 600, planted, cfg);
  const DiscoveryRunResult run1 = execute_subproblems(plan, 1);
  const DiscoveryRunResult run4 = execute_subproblems(plan, 4);
  if (discovery_results_json(run1).dump() != discovery_results_json(run4).dump())
    return {false, "in-memory discovery results differ between 1 and 4 workers"};

  const fs::path dir = "acceptance_tmp";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_discovery_results(run1, (dir / "r1.json").string(),
                          (dir / "t1.json").string());
  write_discovery_results(run4, (dir / "r4.json").string(),
                          (dir / "t4.json").string());
  const auto read_all = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  const bool files_equal =
      read_all(dir / "r1.json") == read_all(dir / "r4.json");
  fs::remove_all(dir);
  if (!files_equal)
    return {false, "discovery artifacts differ between 1 and 4 workers"};

  ModelShape shape;
  shape.n_nodes = 8;
  shape.history_len = 6;
  shape.horizon = 1;
  shape.kernel_width = 3;
  shape.channels = 6;
  shape.hidden = 6;
  shape.hidden_out = 4;
  TrainConfig tc;
  tc.epochs = 8;
  tc.batch_size = 16;
  tc.learning_rate = 0.05;
  tc.seed = derive_seed(kRoot, "c10-train");
  const WindowSpec wspec{6, 1, 1};
  const NormalizedAdjacency adj = normalize_adjacency(data.truth);
  const CtgcnModel init = init_model(shape, derive_seed(kRoot, "c10-init"));
  const TrainResult a = train_model(init, adj, ds, wspec, tc);
  const TrainResult b = train_model(init, adj, ds, wspec, tc);
  if (a.trace.size() != b.trace.size())
    return {false, "training traces have different lengths"};
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    if (std::abs(a.trace[i].train_loss - b.trace[i].train_loss) > 1e-12 ||
        std::abs(a.trace[i].val_loss - b.trace[i].val_loss) > 1e-12)
      return {false, "training traces diverge at epoch " + std::to_string(i)};

  return {true, "artifacts byte-identical across workers, traces rerun-stable"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> checks = {
      {"synthetic discovery recovery", criterion_recovery},
      {"white-noise false positives", criterion_false_positives},
      {"aggregation strategy oracle", criterion_aggregation_oracle},
      {"decomposition speedup and recall", criterion_decomposition},
      {"gradient correctness", criterion_gradients},
      {"forecast adjacency ordering", criterion_forecast_ordering},
      {"discovered vs distance adjacency", criterion_distance_benchmark},
      {"distance kernel closed form", criterion_distance_closed_form},
      {"warping distance properties", criterion_dtw_properties},
      {"determinism across workers and reruns", criterion_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = checks[i].second();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(start);
    std::printf("[%s] %zu. %s (%s) [%.1fs]\n", result.pass ? "PASS" : "FAIL",
                i + 1, checks[i].first.c_str(), result.detail.c_str(), elapsed);
    std::fflush(stdout);
    if (!result.pass) ++failures;
  }
  if (failures) std::printf("%d of 10 acceptance checks failed\n", failures);
  else std::printf("all 10 acceptance checks passed\n");
  return failures == 0 ? 0 : 1;
}
