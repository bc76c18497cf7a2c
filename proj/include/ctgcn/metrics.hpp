#pragma once

#include <string>

#include "ctgcn/aggregate.hpp"
#include "ctgcn/decompose.hpp"
#include "ctgcn/timeseries.hpp"

namespace ctgcn {

// Confusion counts over ordered off-diagonal node pairs; an edge is any
// nonzero weight. Precision is defined as 0 when nothing was predicted.
struct GraphScore {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
};

// Compares on the predicted graph's node names; the truth graph must cover
// the same nodes. Undirected graphs are compared on unordered pairs.
GraphScore adjacency_scores(const CausalAdjacency& predicted,
                            const CausalAdjacency& truth);

double rmse(const Matrix& forecast, const Matrix& target);

// RMSE after mapping both blocks back to the original scale.
double rmse_denormalized(const Matrix& forecast, const Matrix& target,
                         const NormalizationStats& stats);

struct BenchmarkReport {
  double baseline_seconds = 0.0;     // temporal-only decomposition
  double decomposed_seconds = 0.0;   // temporal x spatial decomposition
  double speedup = 0.0;
  int baseline_subproblems = 0;
  int decomposed_subproblems = 0;
  int repetitions = 0;
};

// Times the discovery stage with and without spatial clustering over
// `repetitions` runs each, reporting median wall times. Both arms run with
// the same worker count so the ratio reflects the decomposition itself.
BenchmarkReport benchmark_decomposition(const TimeSeriesDataset& ds,
                                        int period_len,
                                        const Clustering& clustering,
                                        const DiscoveryConfig& cfg,
                                        int repetitions, int workers);

std::string benchmark_report_text(const BenchmarkReport& report);

}  // namespace ctgcn
