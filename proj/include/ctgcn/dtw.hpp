#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctgcn/timeseries.hpp"

namespace ctgcn {

struct DtwConfig {
  // Sakoe-Chiba band half-width; unset means unconstrained. Must cover the
  // length difference of the two series.
  std::optional<int> band;
};

// Dynamic time warping distance with squared pointwise cost and the classic
// three-step recurrence. Returns the accumulated cost of the cheapest path.
double dtw_distance(std::span<const double> a, std::span<const double> b,
                    const DtwConfig& cfg = {});

// Symmetric matrix of DTW distances between per-feature z-scored rows.
Matrix dtw_pairwise_matrix(const TimeSeriesDataset& ds, const DtwConfig& cfg = {},
                           int workers = 1);

struct Clustering {
  std::vector<int> assignment;  // feature index -> cluster id
  std::vector<int> medoids;     // cluster id -> feature index
  double inertia = 0.0;

  int n_clusters() const { return static_cast<int>(medoids.size()); }
  std::vector<std::vector<int>> members() const;
};

struct ClusterOptions {
  DtwConfig dtw;
  std::uint64_t seed = 0;
  int restarts = 5;
  int max_cluster_size = 0;  // 0 disables rebalancing
  int workers = 1;
};

// k-medoids over a precomputed distance matrix: seeded sampling of distinct
// medoids, then alternating assignment and medoid updates until stable. Best
// of `restarts` seeded runs by inertia wins.
Clustering cluster_distance_matrix(const Matrix& distances, int n_clusters,
                                   const ClusterOptions& opts = {});

// Convenience wrapper: z-score rows, build the DTW matrix, cluster it.
Clustering cluster_features(const TimeSeriesDataset& ds, int n_clusters,
                            const ClusterOptions& opts = {});

struct ElbowPoint {
  int k = 0;
  double inertia = 0.0;
};

struct ElbowProfile {
  std::vector<ElbowPoint> points;
  int suggested_k = 0;  // largest second difference of inertia
};

ElbowProfile elbow_profile(const TimeSeriesDataset& ds, int k_min, int k_max,
                           const ClusterOptions& opts = {});

std::string clustering_to_json_string(const Clustering& clustering,
                                      const std::vector<std::string>& names);
void write_clustering_json(const Clustering& clustering,
                           const std::vector<std::string>& names,
                           const std::string& path);
Clustering load_clustering_json(const std::string& path,
                                const std::vector<std::string>& names);

}  // namespace ctgcn
