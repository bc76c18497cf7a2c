#include "ctgcn/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "ctgcn/parallel.hpp"
#include "ctgcn/rng.hpp"

namespace ctgcn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double dtw_distance(std::span<const double> a, std::span<const double> b,
                    const DtwConfig& cfg) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  if (m == 0 || n == 0) throw DataError("dtw: empty series");
  int band = std::max(m, n);
  if (cfg.band) {
    if (*cfg.band < std::abs(m - n))
      throw ConfigError("dtw: band " + std::to_string(*cfg.band) +
                        " cannot cover length difference " +
                        std::to_string(std::abs(m - n)));
    band = *cfg.band;
  }

  // Two-row dynamic program over the (m+1) x (n+1) cost grid.
  std::vector<double> prev(n + 1, kInf), cur(n + 1, kInf);
  prev[0] = 0.0;
  for (int i = 1; i <= m; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    const int lo = std::max(1, i - band);
    const int hi = std::min(n, i + band);
    for (int j = lo; j <= hi; ++j) {
      const double d = a[i - 1] - b[j - 1];
      const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = d * d + best;
    }
    prev.swap(cur);
  }
  return prev[n];
}

Matrix dtw_pairwise_matrix(const TimeSeriesDataset& ds, const DtwConfig& cfg,
                           int workers) {
  validate_dataset(ds);
  const auto [normalized, stats] = zscore_normalize(ds);
  const int n = ds.n_features();
  if (cfg.band && *cfg.band < 0) throw ConfigError("dtw: band must be >= 0");

  std::vector<std::vector<double>> rows(n);
  for (int i = 0; i < n; ++i) {
    rows[i].assign(normalized.values.row(i).begin(),
                   normalized.values.row(i).end());
  }

  std::vector<std::pair<int, int>> tasks;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) tasks.emplace_back(i, j);

  Matrix dist = Matrix::Zero(n, n);
  parallel_for_index(static_cast<int>(tasks.size()), workers, [&](int t) {
    const auto [i, j] = tasks[t];
    const double d = dtw_distance(rows[i], rows[j], cfg);
    dist(i, j) = d;
    dist(j, i) = d;
  });
  return dist;
}

std::vector<std::vector<int>> Clustering::members() const {
  std::vector<std::vector<int>> out(medoids.size());
  for (std::size_t i = 0; i < assignment.size(); ++i)
    out[assignment[i]].push_back(static_cast<int>(i));
  return out;
}

namespace {

std::vector<int> assign_to_medoids(const Matrix& dist,
                                   const std::vector<int>& medoids) {
  const int n = static_cast<int>(dist.rows());
  std::vector<int> assignment(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d = dist(i, medoids[0]);
    for (int c = 1; c < static_cast<int>(medoids.size()); ++c) {
      const double d = dist(i, medoids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[i] = best;
  }
  return assignment;
}

double clustering_inertia(const Matrix& dist, const std::vector<int>& medoids,
                          const std::vector<int>& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    total += dist(static_cast<int>(i), medoids[assignment[i]]);
  return total;
}

Clustering kmedoids_once(const Matrix& dist, int k, std::uint64_t seed) {
  const int n = static_cast<int>(dist.rows());
  Rng rng(seed);

  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  std::vector<int> medoids;
  for (int c = 0; c < k; ++c) {
    const auto pick = rng.below(pool.size());
    medoids.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<long>(pick));
  }
  std::sort(medoids.begin(), medoids.end());

  std::vector<int> assignment;
  for (int round = 0; round < 100; ++round) {
    assignment = assign_to_medoids(dist, medoids);

    // A medoid set can strand a cluster when duplicates collapse distances;
    // reseed an empty cluster with the point farthest from its own medoid.
    for (int c = 0; c < k; ++c) {
      if (std::count(assignment.begin(), assignment.end(), c) > 0) continue;
      int farthest = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (std::find(medoids.begin(), medoids.end(), i) != medoids.end())
          continue;
        const double d = dist(i, medoids[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      if (farthest >= 0) {
        medoids[c] = farthest;
        assignment = assign_to_medoids(dist, medoids);
      }
    }

    std::vector<int> updated(k);
    for (int c = 0; c < k; ++c) {
      int best = medoids[c];
      double best_cost = kInf;
      for (int i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        double cost = 0.0;
        for (int j = 0; j < n; ++j)
          if (assignment[j] == c) cost += dist(i, j);
        if (cost < best_cost) {
          best_cost = cost;
          best = i;
        }
      }
      updated[c] = best;
    }
    if (updated == medoids) break;
    medoids = updated;
  }

  Clustering out;
  out.medoids = medoids;
  out.assignment = assign_to_medoids(dist, medoids);
  out.inertia = clustering_inertia(dist, medoids, out.assignment);
  return out;
}

// Clusters are relabelled so medoid feature indices ascend; output is then
// independent of the restart that produced it.
void canonicalize(Clustering* c) {
  const int k = c->n_clusters();
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return c->medoids[a] < c->medoids[b]; });
  std::vector<int> remap(k);
  std::vector<int> new_medoids(k);
  for (int pos = 0; pos < k; ++pos) {
    remap[order[pos]] = pos;
    new_medoids[pos] = c->medoids[order[pos]];
  }
  c->medoids = new_medoids;
  for (auto& a : c->assignment) a = remap[a];
}

void rebalance(const Matrix& dist, int max_size, Clustering* c) {
  const int n = static_cast<int>(dist.rows());
  const int k = c->n_clusters();
  auto sizes = [&] {
    std::vector<int> s(k, 0);
    for (int a : c->assignment) ++s[a];
    return s;
  };
  for (;;) {
    auto s = sizes();
    int big = -1;
    for (int cid = 0; cid < k; ++cid)
      if (s[cid] > max_size && (big < 0 || s[cid] > s[big])) big = cid;
    if (big < 0) break;

    // Move the member farthest from its medoid to the nearest open cluster.
    int mover = -1;
    double far_d = -1.0;
    for (int i = 0; i < n; ++i) {
      if (c->assignment[i] != big || i == c->medoids[big]) continue;
      const double d = dist(i, c->medoids[big]);
      if (d > far_d) {
        far_d = d;
        mover = i;
      }
    }
    int dest = -1;
    double dest_d = kInf;
    for (int cid = 0; cid < k; ++cid) {
      if (cid == big || s[cid] >= max_size) continue;
      const double d = dist(mover, c->medoids[cid]);
      if (d < dest_d) {
        dest_d = d;
        dest = cid;
      }
    }
    c->assignment[mover] = dest;
  }
  c->inertia = clustering_inertia(dist, c->medoids, c->assignment);
}

}  // namespace

Clustering cluster_distance_matrix(const Matrix& distances, int n_clusters,
                                   const ClusterOptions& opts) {
  const int n = static_cast<int>(distances.rows());
  if (distances.cols() != n || n < 1)
    throw DataError("distance matrix must be square and non-empty");
  if (n_clusters < 1 || n_clusters > n)
    throw ConfigError("cluster count " + std::to_string(n_clusters) +
                      " out of range 1.." + std::to_string(n));
  if (opts.restarts < 1) throw ConfigError("restarts must be >= 1");
  if (opts.max_cluster_size > 0 &&
      static_cast<long long>(opts.max_cluster_size) * n_clusters < n)
    throw ConfigError("max cluster size " +
                      std::to_string(opts.max_cluster_size) + " times " +
                      std::to_string(n_clusters) + " clusters cannot hold " +
                      std::to_string(n) + " features");

  Clustering best;
  bool have = false;
  for (int r = 0; r < opts.restarts; ++r) {
    Clustering cand = kmedoids_once(
        distances, n_clusters, derive_seed(opts.seed, "kmedoids-restart-" +
                                                          std::to_string(r)));
    if (!have || cand.inertia < best.inertia) {
      best = std::move(cand);
      have = true;
    }
  }
  canonicalize(&best);
  if (opts.max_cluster_size > 0) rebalance(distances, opts.max_cluster_size, &best);
  return best;
}

Clustering cluster_features(const TimeSeriesDataset& ds, int n_clusters,
                            const ClusterOptions& opts) {
  const Matrix dist = dtw_pairwise_matrix(ds, opts.dtw, opts.workers);
  return cluster_distance_matrix(dist, n_clusters, opts);
}

ElbowProfile elbow_profile(const TimeSeriesDataset& ds, int k_min, int k_max,
                           const ClusterOptions& opts) {
  if (k_min < 1 || k_max < k_min)
    throw ConfigError("elbow range must satisfy 1 <= k_min <= k_max");
  if (k_max > ds.n_features())
    throw ConfigError("k_max " + std::to_string(k_max) +
                      " exceeds feature count " +
                      std::to_string(ds.n_features()));
  const Matrix dist = dtw_pairwise_matrix(ds, opts.dtw, opts.workers);

  ElbowProfile profile;
  for (int k = k_min; k <= k_max; ++k) {
    const Clustering c = cluster_distance_matrix(dist, k, opts);
    profile.points.push_back({k, c.inertia});
  }
  profile.suggested_k = profile.points.front().k;
  double best_curv = -kInf;
  for (std::size_t i = 1; i + 1 < profile.points.size(); ++i) {
    const double curv = profile.points[i - 1].inertia -
                        2.0 * profile.points[i].inertia +
                        profile.points[i + 1].inertia;
    if (curv > best_curv) {
      best_curv = curv;
      profile.suggested_k = profile.points[i].k;
    }
  }
  return profile;
}

std::string clustering_to_json_string(const Clustering& clustering,
                                      const std::vector<std::string>& names) {
  nlohmann::json j;
  j["clusters"] = nlohmann::json::array();
  for (const auto& group : clustering.members()) {
    nlohmann::json arr = nlohmann::json::array();
    for (int idx : group) arr.push_back(names.at(idx));
    j["clusters"].push_back(arr);
  }
  j["medoids"] = nlohmann::json::array();
  for (int m : clustering.medoids) j["medoids"].push_back(names.at(m));
  j["inertia"] = clustering.inertia;
  return j.dump(2);
}

void write_clustering_json(const Clustering& clustering,
                           const std::vector<std::string>& names,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << clustering_to_json_string(clustering, names) << "\n";
}

Clustering load_clustering_json(const std::string& path,
                                const std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!j.contains("clusters") || !j["clusters"].is_array())
    throw DataError(path + ": missing clusters array");

  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    throw DataError(path + ": unknown feature '" + name + "'");
  };

  Clustering c;
  c.assignment.assign(names.size(), -1);
  int cluster_id = 0;
  for (const auto& group : j["clusters"]) {
    for (const auto& name : group) {
      const int idx = index_of(name.get<std::string>());
      if (c.assignment[idx] != -1)
        throw DataError(path + ": feature '" + name.get<std::string>() +
                        "' listed twice");
      c.assignment[idx] = cluster_id;
    }
    ++cluster_id;
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    if (c.assignment[i] == -1)
      throw DataError(path + ": feature '" + names[i] + "' missing from clusters");

  if (j.contains("medoids")) {
    for (const auto& name : j["medoids"])
      c.medoids.push_back(index_of(name.get<std::string>()));
  } else {
    c.medoids.assign(cluster_id, 0);
    std::vector<bool> seen(cluster_id, false);
    for (std::size_t i = 0; i < c.assignment.size(); ++i) {
      if (!seen[c.assignment[i]]) {
        c.medoids[c.assignment[i]] = static_cast<int>(i);
        seen[c.assignment[i]] = true;
      }
    }
  }
  if (static_cast<int>(c.medoids.size()) != cluster_id)
    throw DataError(path + ": medoid count does not match cluster count");
  c.inertia = j.value("inertia", 0.0);
  return c;
}

}  // namespace ctgcn
