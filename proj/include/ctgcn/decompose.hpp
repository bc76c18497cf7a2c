#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ctgcn/aggregate.hpp"
#include "ctgcn/dtw.hpp"
#include "ctgcn/pcmci.hpp"
#include "ctgcn/timeseries.hpp"

namespace ctgcn {

// One temporal-period x cluster cell of the decomposition grid.
struct Subproblem {
  int period_index = 0;
  int cluster_id = 0;
  std::vector<int> features;  // global indices, ascending
  TimeSeriesDataset data;
};

struct SkipRecord {
  int period_index = 0;
  int cluster_id = 0;
  std::string reason;
};

struct DecompositionPlan {
  int n_periods = 0;
  int n_clusters = 0;
  int period_len = 0;
  int n_features = 0;
  int dropped_samples = 0;
  DiscoveryConfig config;
  std::vector<std::string> feature_names;
  std::vector<Subproblem> subproblems;  // ordered by (period, cluster)
  std::vector<SkipRecord> skipped;
  std::vector<std::string> warnings;
};

// Splits the series into consecutive periods and the features into the given
// clusters; discovery never crosses a cluster boundary. Single-feature
// clusters have no pairs to test and are skipped with a reason.
DecompositionPlan plan_subproblems(const TimeSeriesDataset& ds, int period_len,
                                   const Clustering& clustering,
                                   const DiscoveryConfig& cfg);

Clustering trivial_clustering(int n_features);

struct SubproblemOutcome {
  int period_index = 0;
  int cluster_id = 0;
  std::vector<int> features;
  std::optional<CausalTestResults> results;
  std::string error;  // non-empty when the sub-problem failed
  double wall_seconds = 0.0;
};

struct DiscoveryRunResult {
  std::vector<std::string> feature_names;
  int n_periods = 0;
  int n_clusters = 0;
  int tau_max = 0;
  double alpha = 0.0;
  std::vector<SubproblemOutcome> outcomes;  // ordered by (period, cluster)
  std::vector<SkipRecord> skipped;
  std::vector<std::string> warnings;
  double total_wall_seconds = 0.0;
};

// Runs every planned sub-problem on a pool of `workers` threads. Outcomes are
// keyed by (period, cluster) and independent of the worker count; per-problem
// failures are captured, not thrown.
DiscoveryRunResult execute_subproblems(const DecompositionPlan& plan,
                                       int workers);

// Results serialization carries per-sub-problem link lists. Unoriented
// contemporaneous links appear in both directions. Timings are deliberately
// kept in a separate document so the results file is identical across worker
// counts.
nlohmann::json discovery_results_json(const DiscoveryRunResult& run);
nlohmann::json discovery_timings_json(const DiscoveryRunResult& run);
void write_discovery_results(const DiscoveryRunResult& run,
                             const std::string& results_path,
                             const std::string& timings_path);
DiscoveryRunResult discovery_results_from_json(const nlohmann::json& j);
DiscoveryRunResult load_discovery_results(const std::string& path);

// Builds the vote tensor straight from in-memory outcomes.
VoteTensor collect_votes(const DiscoveryRunResult& run, VoteMode mode);

}  // namespace ctgcn
