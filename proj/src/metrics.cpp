#include "ctgcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ctgcn {

GraphScore adjacency_scores(const CausalAdjacency& predicted,
                            const CausalAdjacency& truth) {
  validate_adjacency(predicted);
  validate_adjacency(truth);
  const int n = predicted.n_nodes();
  if (truth.n_nodes() != n)
    throw DataError("graphs have different node counts");
  std::vector<int> map(n);
  for (int i = 0; i < n; ++i) {
    map[i] = truth.feature_names == predicted.feature_names
                 ? i
                 : [&] {
                     for (int j = 0; j < n; ++j)
                       if (truth.feature_names[j] == predicted.feature_names[i])
                         return j;
                     throw DataError("truth graph lacks node '" +
                                     predicted.feature_names[i] + "'");
                   }();
  }
  const bool directed = predicted.directed && truth.directed;

  GraphScore s;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      if (!directed && b < a) continue;
      bool pred = predicted.weights(a, b) != 0.0;
      bool real = truth.weights(map[a], map[b]) != 0.0;
      if (!directed) {
        pred = pred || predicted.weights(b, a) != 0.0;
        real = real || truth.weights(map[b], map[a]) != 0.0;
      }
      if (pred && real) ++s.tp;
      else if (pred && !real) ++s.fp;
      else if (!pred && real) ++s.fn;
      else ++s.tn;
    }
  }
  const int total = s.tp + s.fp + s.fn + s.tn;
  s.precision = (s.tp + s.fp) > 0 ? static_cast<double>(s.tp) / (s.tp + s.fp) : 0.0;
  s.recall = (s.tp + s.fn) > 0 ? static_cast<double>(s.tp) / (s.tp + s.fn) : 0.0;
  s.accuracy = total > 0 ? static_cast<double>(s.tp + s.tn) / total : 0.0;
  s.f1 = (s.precision + s.recall) > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

double rmse(const Matrix& forecast, const Matrix& target) {
  if (forecast.rows() != target.rows() || forecast.cols() != target.cols())
    throw DataError("rmse blocks have different shapes");
  if (forecast.size() == 0) throw DataError("rmse over empty blocks");
  return std::sqrt((forecast - target).squaredNorm() / forecast.size());
}

double rmse_denormalized(const Matrix& forecast, const Matrix& target,
                         const NormalizationStats& stats) {
  return rmse(denormalize_block(forecast, stats),
              denormalize_block(target, stats));
}

BenchmarkReport benchmark_decomposition(const TimeSeriesDataset& ds,
                                        int period_len,
                                        const Clustering& clustering,
                                        const DiscoveryConfig& cfg,
                                        int repetitions, int workers) {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");

  const DecompositionPlan baseline =
      plan_subproblems(ds, period_len, trivial_clustering(ds.n_features()), cfg);
  const DecompositionPlan decomposed =
      plan_subproblems(ds, period_len, clustering, cfg);

  auto median_seconds = [&](const DecompositionPlan& plan) {
    std::vector<double> times(repetitions);
    for (int r = 0; r < repetitions; ++r)
      times[r] = execute_subproblems(plan, workers).total_wall_seconds;
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
  };

  BenchmarkReport report;
  report.repetitions = repetitions;
  report.baseline_subproblems = static_cast<int>(baseline.subproblems.size());
  report.decomposed_subproblems = static_cast<int>(decomposed.subproblems.size());
  report.baseline_seconds = median_seconds(baseline);
  report.decomposed_seconds = median_seconds(decomposed);
  report.speedup = report.decomposed_seconds > 0
                       ? report.baseline_seconds / report.decomposed_seconds
                       : 0.0;
  return report;
}

std::string benchmark_report_text(const BenchmarkReport& report) {
  std::ostringstream os;
  os << "discovery benchmark (" << report.repetitions << " repetitions, median)\n"
     << "  temporal only:      " << report.baseline_seconds << " s over "
     << report.baseline_subproblems << " sub-problems\n"
     << "  temporal x spatial: " << report.decomposed_seconds << " s over "
     << report.decomposed_subproblems << " sub-problems\n"
     << "  speedup:            " << report.speedup << "x\n";
  return os.str();
}

}  // namespace ctgcn
