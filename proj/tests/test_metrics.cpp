#include <doctest.h>

#include <cmath>

#include "ctgcn/dtw.hpp"
#include "ctgcn/metrics.hpp"
#include "ctgcn/rng.hpp"
#include "ctgcn/synthgen.hpp"

using namespace ctgcn;

namespace {

CausalAdjacency named_graph(int n, const std::vector<std::pair<int, int>>& edges,
                            bool directed = true) {
  CausalAdjacency adj;
  for (int i = 0; i < n; ++i) adj.feature_names.push_back("n" + std::to_string(i));
  adj.directed = directed;
  adj.weights = Matrix::Zero(n, n);
  for (const auto& [a, b] : edges) {
    adj.weights(a, b) = 1.0;
    if (!directed) adj.weights(b, a) = 1.0;
  }
  return adj;
}

CausalAdjacency random_graph(Rng& rng, int n, double density) {
  CausalAdjacency adj;
  for (int i = 0; i < n; ++i) adj.feature_names.push_back("n" + std::to_string(i));
  adj.weights = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.uniform() < density) adj.weights(i, j) = 1.0;
  return adj;
}

}  // namespace

TEST_CASE("perfect prediction scores all ones") {
  Rng rng(1);
  const auto truth = random_graph(rng, 30, 50.0 / (30 * 29));
  const auto score = adjacency_scores(truth, truth);
  CHECK(score.precision == 1.0);
  CHECK(score.recall == 1.0);
  CHECK(score.accuracy == 1.0);
  CHECK(score.f1 == 1.0);
  CHECK(score.fp == 0);
  CHECK(score.fn == 0);
  CHECK(score.tp + score.tn == 30 * 29);
}

TEST_CASE("empty prediction against 50 true edges") {
  Rng rng(2);
  CausalAdjacency truth;
  for (int i = 0; i < 30; ++i) truth.feature_names.push_back("n" + std::to_string(i));
  truth.weights = Matrix::Zero(30, 30);
  int placed = 0;
  while (placed < 50) {
    const int a = static_cast<int>(rng.below(30));
    const int b = static_cast<int>(rng.below(30));
    if (a == b || truth.weights(a, b) != 0.0) continue;
    truth.weights(a, b) = 1.0;
    ++placed;
  }
  const auto empty = named_graph(30, {});
  const auto score = adjacency_scores(empty, truth);
  CHECK(score.tp == 0);
  CHECK(score.fp == 0);
  CHECK(score.fn == 50);
  CHECK(score.tn == 870 - 50);
  CHECK(score.precision == 0.0);
  CHECK(score.f1 == 0.0);
  CHECK(score.accuracy == doctest::Approx(820.0 / 870.0));
}

TEST_CASE("complement prediction has zero accuracy") {
  const auto truth = named_graph(4, {{0, 1}, {2, 3}});
  CausalAdjacency complement = truth;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) complement.weights(i, j) = truth.weights(i, j) == 0.0 ? 1.0 : 0.0;
  const auto score = adjacency_scores(complement, truth);
  CHECK(score.accuracy == 0.0);
  CHECK(score.tp == 0);
  CHECK(score.tn == 0);
}

TEST_CASE("counts always cover every ordered pair") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(8));
    const auto pred = random_graph(rng, n, 0.3);
    const auto truth = random_graph(rng, n, 0.3);
    const auto score = adjacency_scores(pred, truth);
    CHECK(score.tp + score.fp + score.fn + score.tn == n * (n - 1));
    if (score.tp + score.fp > 0) {
      const double p = static_cast<double>(score.tp) / (score.tp + score.fp);
      CHECK(score.precision == doctest::Approx(p));
    }
    if (score.precision + score.recall > 0) {
      const double f1 = 2 * score.precision * score.recall /
                        (score.precision + score.recall);
      CHECK(score.f1 == doctest::Approx(f1));
    }
  }
}

TEST_CASE("undirected graphs are scored on unordered pairs") {
  const auto pred = named_graph(3, {{0, 1}}, false);
  const auto truth = named_graph(3, {{0, 1}, {1, 2}}, false);
  const auto score = adjacency_scores(pred, truth);
  CHECK(score.tp + score.fp + score.fn + score.tn == 3);
  CHECK(score.tp == 1);
  CHECK(score.fn == 1);
  CHECK(score.tn == 1);
}

TEST_CASE("node order does not matter, node mismatch does") {
  auto pred = named_graph(3, {{0, 2}});
  auto truth = named_graph(3, {{0, 2}});
  // Renumber the truth's rows so names map differently.
  truth.feature_names = {"n2", "n0", "n1"};
  truth.weights.setZero();
  truth.weights(1, 0) = 1.0;  // n0 -> n2 in the permuted frame
  const auto score = adjacency_scores(pred, truth);
  CHECK(score.tp == 1);
  CHECK(score.fp == 0);
  CHECK(score.fn == 0);

  truth.feature_names = {"n0", "n1", "other"};
  CHECK_THROWS_AS(adjacency_scores(pred, truth), DataError);
}

TEST_CASE("rmse hand values") {
  Matrix a(1, 2), b(1, 2);
  a << 1, 2;
  b << 3, 2;
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt(2.0)));
  CHECK(rmse(a, a) == 0.0);

  Matrix c = Matrix::Zero(3, 4);
  Matrix d = Matrix::Ones(3, 4);
  CHECK(rmse(c, d) == doctest::Approx(1.0));

  CHECK_THROWS_AS(rmse(a, Matrix::Zero(2, 2)), DataError);
}

TEST_CASE("rmse symmetry and triangle bound") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix a(3, 5), b(3, 5), c(3, 5);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 5; ++j) {
        a(i, j) = rng.normal();
        b(i, j) = rng.normal();
        c(i, j) = rng.normal();
      }
    CHECK(rmse(a, b) == doctest::Approx(rmse(b, a)));
    CHECK(rmse(a, c) <= rmse(a, b) + rmse(b, c) + 1e-9);
  }
}

TEST_CASE("denormalized rmse scales by the feature stds") {
  NormalizationStats stats;
  stats.mean = Vector::Zero(2);
  stats.stddev = Vector(2);
  stats.stddev << 2.0, 2.0;
  Matrix f = Matrix::Zero(2, 3);
  Matrix t = Matrix::Ones(2, 3);
  // Uniform std of 2 doubles every residual.
  CHECK(rmse_denormalized(f, t, stats) == doctest::Approx(2.0));
  CHECK(rmse(f, t) == doctest::Approx(1.0));
}

TEST_CASE("self-benchmark lands near factor one") {
  ScmSpec spec;
  spec.n_features = 4;
  spec.edges = {{0, 1, 1, 0.5}, {2, 3, 1, 0.5}};
  const auto data = generate_scm_dataset(spec, 800, 5);
  DiscoveryConfig cfg;
  cfg.tau_max = 2;
  // Trivial clustering on both arms: the ratio is pure timing noise.
  const auto report = benchmark_decomposition(
      data.dataset, 400, trivial_clustering(4), cfg, 3, 1);
  CHECK(report.speedup > 0.8);
  CHECK(report.speedup < 1.25);
  CHECK(report.baseline_subproblems == 2);
  CHECK(report.decomposed_subproblems == 2);
  CHECK(report.repetitions == 3);
  CHECK(report.baseline_seconds > 0.0);
  CHECK(report.decomposed_seconds > 0.0);

  CHECK_THROWS_AS(benchmark_decomposition(data.dataset, 400,
                                          trivial_clustering(4), cfg, 0, 1),
                  ConfigError);
}

TEST_CASE("spatial decomposition speeds up discovery") {
  // Two independent blocks of 8: clustered discovery tests far fewer pairs.
  ScmSpec spec;
  spec.n_features = 16;
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < 7; ++i)
      spec.edges.push_back({b * 8 + i, b * 8 + i + 1, 1, 0.3});
  const auto data = generate_scm_dataset(spec, 2000, 6);

  Clustering blocks;
  blocks.assignment.resize(16);
  for (int i = 0; i < 16; ++i) blocks.assignment[i] = i / 8;
  blocks.medoids = {0, 8};

  DiscoveryConfig cfg;
  cfg.tau_max = 2;
  const auto report =
      benchmark_decomposition(data.dataset, 1000, blocks, cfg, 1, 1);
  CHECK(report.speedup > 1.2);
  CHECK(report.baseline_subproblems == 2);
  CHECK(report.decomposed_subproblems == 4);

  const auto text = benchmark_report_text(report);
  CHECK(text.find("speedup") != std::string::npos);
}
