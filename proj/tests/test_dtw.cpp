#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <vector>

#include "ctgcn/dtw.hpp"
#include "ctgcn/rng.hpp"

using namespace ctgcn;

namespace {

// Reference DTW: recursively enumerate every monotone warping path through
// the cost lattice and keep the cheapest. Exponential, so only for tiny
// inputs, but independent of the dynamic program under test.
double brute_force_dtw(const std::vector<double>& a,
                       const std::vector<double>& b) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, int, double)> walk = [&](int i, int j, double cost) {
    cost += (a[i] - b[j]) * (a[i] - b[j]);
    if (cost >= best) return;
    if (i == m - 1 && j == n - 1) {
      best = cost;
      return;
    }
    if (i + 1 < m && j + 1 < n) walk(i + 1, j + 1, cost);
    if (i + 1 < m) walk(i + 1, j, cost);
    if (j + 1 < n) walk(i, j + 1, cost);
  };
  walk(0, 0, 0.0);
  return best;
}

std::vector<double> random_series(Rng& rng, int len) {
  std::vector<double> s(len);
  for (auto& v : s) v = rng.uniform(-2.0, 2.0);
  return s;
}

TimeSeriesDataset duplicates_dataset() {
  // Three copies of one shape, three of another.
  TimeSeriesDataset ds;
  ds.feature_names = {"a1", "a2", "a3", "b1", "b2", "b3"};
  ds.values.resize(6, 12);
  for (int c = 0; c < 12; ++c) {
    const double a = std::sin(0.6 * c);
    const double b = (c % 4) - 1.5;
    for (int i = 0; i < 3; ++i) ds.values(i, c) = a;
    for (int i = 3; i < 6; ++i) ds.values(i, c) = b;
  }
  return ds;
}

}  // namespace

TEST_CASE("dtw of identical and stretched series is zero") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> stretched{1, 1, 2, 2, 3, 3};
  CHECK(dtw_distance(a, a) == 0.0);
  CHECK(dtw_distance(a, stretched) == 0.0);
}

TEST_CASE("dtw of constant offset series") {
  const std::vector<double> a{0, 0};
  const std::vector<double> b{1, 1};
  CHECK(dtw_distance(a, b) == doctest::Approx(2.0));
}

TEST_CASE("dtw matches exhaustive path enumeration") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(5));
    const int n = 1 + static_cast<int>(rng.below(5));
    const auto a = random_series(rng, m);
    const auto b = random_series(rng, n);
    const double got = dtw_distance(a, b);
    const double want = brute_force_dtw(a, b);
    CHECK(std::abs(got - want) < 1e-12);
  }
}

TEST_CASE("dtw is symmetric and bounded by the diagonal path") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int len = 4 + static_cast<int>(rng.below(12));
    const auto a = random_series(rng, len);
    const auto b = random_series(rng, len);
    const double ab = dtw_distance(a, b);
    const double ba = dtw_distance(b, a);
    CHECK(std::abs(ab - ba) < 1e-12);
    double diagonal = 0.0;
    for (int i = 0; i < len; ++i) diagonal += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(ab <= diagonal + 1e-12);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("sakoe-chiba band constrains the path") {
  const std::vector<double> a{0, 0, 0, 10};
  const std::vector<double> b{10, 0, 0, 0};
  DtwConfig wide;
  wide.band = 3;
  // Band as wide as the series is no constraint at all.
  CHECK(dtw_distance(a, b, wide) == dtw_distance(a, b));
  DtwConfig tight;
  tight.band = 0;
  // Band 0 forces the diagonal.
  CHECK(dtw_distance(a, b, tight) == doctest::Approx(200.0));

  const std::vector<double> longer{0, 0, 0, 0, 0, 0};
  DtwConfig narrow;
  narrow.band = 1;
  CHECK_THROWS_AS(dtw_distance(a, longer, narrow), ConfigError);
}

TEST_CASE("empty series are rejected") {
  const std::vector<double> a{1.0};
  const std::vector<double> empty;
  CHECK_THROWS_AS(dtw_distance(empty, a), DataError);
  CHECK_THROWS_AS(dtw_distance(a, empty), DataError);
}

TEST_CASE("pairwise matrix is symmetric with zero diagonal") {
  TimeSeriesDataset ds;
  ds.feature_names = {"p", "q", "r"};
  ds.values.resize(3, 20);
  Rng rng(5);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 20; ++c) ds.values(i, c) = rng.normal();
  const auto d = dtw_pairwise_matrix(ds);
  REQUIRE(d.rows() == 3);
  REQUIRE(d.cols() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(d(i, i) == 0.0);
    for (int j = 0; j < 3; ++j) CHECK(d(i, j) == d(j, i));
  }
  // Worker count must not change a single bit.
  const auto d4 = dtw_pairwise_matrix(ds, {}, 4);
  CHECK(d == d4);
}

TEST_CASE("duplicate series cluster into their copies") {
  const auto ds = duplicates_dataset();
  const auto clustering = cluster_features(ds, 2);
  REQUIRE(clustering.assignment.size() == 6);
  CHECK(clustering.inertia == 0.0);
  CHECK(clustering.assignment[0] == clustering.assignment[1]);
  CHECK(clustering.assignment[1] == clustering.assignment[2]);
  CHECK(clustering.assignment[3] == clustering.assignment[4]);
  CHECK(clustering.assignment[4] == clustering.assignment[5]);
  CHECK(clustering.assignment[0] != clustering.assignment[3]);
  // Canonical order: cluster ids follow ascending medoid index.
  CHECK(clustering.medoids[0] < clustering.medoids[1]);
}

TEST_CASE("single cluster picks the summed-distance minimizer as medoid") {
  TimeSeriesDataset ds;
  ds.feature_names = {"a", "b", "c", "d"};
  ds.values.resize(4, 15);
  Rng rng(9);
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 15; ++c) ds.values(i, c) = rng.normal() + i;
  const auto clustering = cluster_features(ds, 1);
  REQUIRE(clustering.n_clusters() == 1);

  const auto d = dtw_pairwise_matrix(ds);
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (d.row(i).sum() < d.row(best).sum()) best = i;
  CHECK(clustering.medoids[0] == best);
  CHECK(clustering.inertia == doctest::Approx(d.row(best).sum()));
}

TEST_CASE("one cluster per feature has zero inertia") {
  // Distinct rows, so with k = N every feature is its own medoid.
  TimeSeriesDataset ds;
  ds.values.resize(6, 20);
  Rng rng(17);
  for (int i = 0; i < 6; ++i) {
    ds.feature_names.push_back("f" + std::to_string(i));
    for (int c = 0; c < 20; ++c) ds.values(i, c) = rng.normal() + 2.0 * i;
  }
  const auto clustering = cluster_features(ds, 6);
  CHECK(clustering.inertia == 0.0);
  std::vector<int> seen(6, 0);
  for (int i = 0; i < 6; ++i) ++seen[clustering.assignment[i]];
  for (int count : seen) CHECK(count == 1);
}

TEST_CASE("cluster count outside range is rejected") {
  const auto ds = duplicates_dataset();
  CHECK_THROWS_AS(cluster_features(ds, 7), ConfigError);
  CHECK_THROWS_AS(cluster_features(ds, 0), ConfigError);
}

TEST_CASE("clustering is deterministic per seed") {
  TimeSeriesDataset ds;
  ds.feature_names.clear();
  ds.values.resize(8, 30);
  Rng rng(31);
  for (int i = 0; i < 8; ++i) {
    ds.feature_names.push_back("f" + std::to_string(i));
    for (int c = 0; c < 30; ++c) ds.values(i, c) = rng.normal();
  }
  ClusterOptions opts;
  opts.seed = 42;
  const auto a = cluster_features(ds, 3, opts);
  const auto b = cluster_features(ds, 3, opts);
  CHECK(a.assignment == b.assignment);
  CHECK(a.medoids == b.medoids);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("max cluster size caps membership") {
  const auto ds = duplicates_dataset();
  ClusterOptions opts;
  opts.max_cluster_size = 3;
  const auto clustering = cluster_features(ds, 2, opts);
  for (const auto& members : clustering.members())
    CHECK(members.size() <= 3);

  ClusterOptions tiny;
  tiny.max_cluster_size = 2;  // 2 clusters * 2 < 6 features
  CHECK_THROWS_AS(cluster_features(ds, 2, tiny), ConfigError);
}

TEST_CASE("elbow profile flags the duplicate count") {
  const auto ds = duplicates_dataset();
  const auto profile = elbow_profile(ds, 1, 4);
  REQUIRE(profile.points.size() == 4);
  CHECK(profile.points[0].k == 1);
  CHECK(profile.points[1].inertia == 0.0);
  CHECK(profile.points[2].inertia == 0.0);
  CHECK(profile.points[3].inertia == 0.0);
  CHECK(profile.suggested_k == 2);
  CHECK_THROWS_AS(elbow_profile(ds, 3, 2), ConfigError);
}

TEST_CASE("inertia is non-increasing in k") {
  Rng rng(17);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    TimeSeriesDataset ds;
    ds.values.resize(10, 40);
    for (int i = 0; i < 10; ++i) {
      ds.feature_names.push_back("s" + std::to_string(i));
      for (int c = 0; c < 40; ++c) ds.values(i, c) = rng.normal();
    }
    ClusterOptions opts;
    opts.seed = seed;
    const auto profile = elbow_profile(ds, 1, 6, opts);
    for (std::size_t i = 1; i < profile.points.size(); ++i)
      CHECK(profile.points[i].inertia <= profile.points[i - 1].inertia + 1e-9);
  }
}

TEST_CASE("clustering JSON round trips") {
  const auto ds = duplicates_dataset();
  const auto clustering = cluster_features(ds, 2);
  write_clustering_json(clustering, ds.feature_names, "clust_rt.json");
  const auto back = load_clustering_json("clust_rt.json", ds.feature_names);
  std::remove("clust_rt.json");
  CHECK(back.assignment == clustering.assignment);
  CHECK(back.medoids == clustering.medoids);
  CHECK(back.inertia == clustering.inertia);

  // Names missing from the file are an error.
  std::ofstream out("clust_bad.json");
  out << "{\"clusters\": [[\"a1\"]], \"medoids\": [\"a1\"], \"inertia\": 0}";
  out.close();
  CHECK_THROWS_AS(load_clustering_json("clust_bad.json", ds.feature_names),
                  DataError);
  std::remove("clust_bad.json");
}
