#include "ctgcn/pcmci.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace ctgcn {

namespace {

struct LaggedVar {
  int feature;
  int lag;

  bool operator<(const LaggedVar& o) const {
    return feature != o.feature ? feature < o.feature : lag < o.lag;
  }
  bool operator==(const LaggedVar& o) const {
    return feature == o.feature && lag == o.lag;
  }
};

// All tests share the row range t in [tau_max, P) so every conditioning set
// sees identical samples regardless of its lags.
class AlignedColumns {
 public:
  AlignedColumns(const Matrix& values, int tau_max)
      : values_(values), tau_max_(tau_max),
        rows_(static_cast<int>(values.cols()) - tau_max) {}

  int rows() const { return rows_; }

  Vector column(int feature, int lag) const {
    Vector out(rows_);
    for (int t = 0; t < rows_; ++t)
      out[t] = values_(feature, tau_max_ + t - lag);
    return out;
  }

  Matrix columns(const std::vector<LaggedVar>& vars) const {
    Matrix z(rows_, static_cast<Eigen::Index>(vars.size()));
    for (std::size_t c = 0; c < vars.size(); ++c)
      z.col(static_cast<Eigen::Index>(c)) = column(vars[c].feature, vars[c].lag);
    return z;
  }

 private:
  const Matrix& values_;
  int tau_max_;
  int rows_;
};

std::vector<LaggedVar> dedupe_sorted(std::vector<LaggedVar> vars) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

// Strongest-first candidate order; ties fall back to (feature, lag).
std::vector<int> order_by_strength(const std::vector<ParentCandidate>& cands) {
  std::vector<int> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = std::abs(cands[a].statistic);
    const double sb = std::abs(cands[b].statistic);
    if (sa != sb) return sa > sb;
    if (cands[a].feature != cands[b].feature)
      return cands[a].feature < cands[b].feature;
    return cands[a].lag < cands[b].lag;
  });
  return order;
}

// Parents capped to the strongest max_condition_size entries for use as
// conditioning sets in the second phase.
std::vector<LaggedVar> capped_parents(const std::vector<ParentCandidate>& parents,
                                      int cap) {
  const auto order = order_by_strength(parents);
  std::vector<LaggedVar> out;
  const int take = std::min<int>(cap, static_cast<int>(order.size()));
  for (int i = 0; i < take; ++i) {
    out.push_back({parents[order[i]].feature, parents[order[i]].lag});
  }
  return out;
}

// Next k-combination of indices into a pool of size n, lexicographic order.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - (k - i)) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

CiTestFn resolve_ci(const CiTestFn& ci) {
  if (ci) return ci;
  return [](const Vector& x, const Vector& y, const Matrix& z) {
    return parcorr_pvalue(x, y, z);
  };
}

}  // namespace

void DiscoveryConfig::validate() const {
  if (tau_max < 1)
    throw ConfigError("tau_max must be >= 1, got " + std::to_string(tau_max));
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  if (pc_alpha > 0.0 && !(pc_alpha < 1.0))
    throw ConfigError("pc_alpha must lie in (0, 1), got " +
                      std::to_string(pc_alpha));
  if (max_condition_size < 0)
    throw ConfigError("max_condition_size must be >= 0, got " +
                      std::to_string(max_condition_size));
}

CausalTestResults::CausalTestResults(int n_features, int tau_max)
    : n_(n_features), tau_max_(tau_max),
      tests_(static_cast<std::size_t>(n_features) * n_features * (tau_max + 1)),
      orient_(static_cast<std::size_t>(n_features) * n_features,
              Orientation::kNone) {}

int CausalTestResults::index(int source, int target, int lag) const {
  // Lag-0 tests are direction-free; both orders share one slot.
  if (lag == 0 && source > target) std::swap(source, target);
  return (lag * n_ + source) * n_ + target;
}

LinkTest& CausalTestResults::at(int source, int target, int lag) {
  return tests_[index(source, target, lag)];
}

const LinkTest& CausalTestResults::at(int source, int target, int lag) const {
  return tests_[index(source, target, lag)];
}

Orientation CausalTestResults::orientation(int j, int k) const {
  return orient_[j * n_ + k];
}

void CausalTestResults::set_orientation(int j, int k, Orientation o) {
  orient_[j * n_ + k] = o;
  Orientation mirror = o;
  if (o == Orientation::kForward) mirror = Orientation::kBackward;
  else if (o == Orientation::kBackward) mirror = Orientation::kForward;
  orient_[k * n_ + j] = mirror;
}

bool CausalTestResults::directed_link(int source, int target, int lag) const {
  const LinkTest& link = at(source, target, lag);
  if (!link.present) return false;
  if (lag > 0) return true;
  const Orientation o = orientation(source, target);
  return o == Orientation::kForward || o == Orientation::kUnoriented;
}

ParentSets discover_lagged_parents(const TimeSeriesDataset& ds,
                                   const DiscoveryConfig& cfg,
                                   const CiTestFn& ci,
                                   std::vector<std::string>* warnings) {
  cfg.validate();
  validate_dataset(ds);
  const int n = ds.n_features();
  const int p_samples = ds.n_samples();
  const int rows = p_samples - cfg.tau_max;
  if (rows < 3)
    throw InsufficientDataError(
        "lagged parent discovery: " + std::to_string(p_samples) +
        " samples leave " + std::to_string(rows) +
        " effective rows at tau_max " + std::to_string(cfg.tau_max));
  if (warnings && rows < 10 * n)
    warnings->push_back("effective sample count " + std::to_string(rows) +
                        " is below 10x feature count " + std::to_string(n));

  const AlignedColumns cols(ds.values, cfg.tau_max);
  const double pc_alpha = cfg.effective_pc_alpha();
  const CiTestFn test = resolve_ci(ci);

  ParentSets parents(n);
  for (int target = 0; target < n; ++target) {
    std::vector<ParentCandidate> cands;
    for (int f = 0; f < n; ++f)
      for (int lag = 1; lag <= cfg.tau_max; ++lag)
        cands.push_back({f, lag, 0.0, 0.0});

    const Vector y = cols.column(target, 0);
    for (int level = 0; level <= cfg.max_condition_size; ++level) {
      if (cands.empty()) break;
      if (level > static_cast<int>(cands.size()) - 1) break;

      const auto order = order_by_strength(cands);
      std::vector<double> new_stat(cands.size());
      std::vector<double> new_p(cands.size());
      for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const int c = order[oi];
        std::vector<LaggedVar> zvars;
        for (std::size_t zi = 0; zi < order.size() && static_cast<int>(zvars.size()) < level; ++zi) {
          if (order[zi] == c) continue;
          zvars.push_back({cands[order[zi]].feature, cands[order[zi]].lag});
        }
        const Vector x = cols.column(cands[c].feature, cands[c].lag);
        const CiOutcome out = test(x, y, cols.columns(zvars));
        new_stat[c] = out.statistic;
        new_p[c] = out.p_value;
      }
      std::vector<ParentCandidate> kept;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        cands[i].statistic = new_stat[i];
        cands[i].p_value = std::max(cands[i].p_value, new_p[i]);
        if (new_p[i] <= pc_alpha) kept.push_back(cands[i]);
      }
      cands.swap(kept);
    }
    std::sort(cands.begin(), cands.end(), [](const ParentCandidate& a,
                                             const ParentCandidate& b) {
      return a.feature != b.feature ? a.feature < b.feature : a.lag < b.lag;
    });
    parents[target] = std::move(cands);
  }
  return parents;
}

namespace {

struct PairState {
  bool adjacent = true;
  double max_p = 0.0;
  double stat_at_max = 0.0;
  bool tested = false;
  std::vector<int> sepset;  // contemporaneous part only
  bool has_sepset = false;
};

}  // namespace

CausalTestResults discover_full_graph(const TimeSeriesDataset& ds,
                                      const DiscoveryConfig& cfg,
                                      const CiTestFn& ci,
                                      std::vector<std::string>* warnings) {
  const ParentSets parents = discover_lagged_parents(ds, cfg, ci, warnings);
  const int n = ds.n_features();
  const AlignedColumns cols(ds.values, cfg.tau_max);
  const CiTestFn test = resolve_ci(ci);
  const double pc_alpha = cfg.effective_pc_alpha();

  CausalTestResults results(n, cfg.tau_max);

  // Full surviving parent sets, strongest first. The condition-size cap
  // belongs to the skeleton iterations; the retests below need every kept
  // parent or a capped-out common driver leaks spurious partial correlation.
  std::vector<std::vector<LaggedVar>> kept(n);
  for (int j = 0; j < n; ++j)
    kept[j] = capped_parents(parents[j], static_cast<int>(parents[j].size()));

  // Lagged links: every pair is retested against the kept parents of both
  // endpoints, but only skeleton survivors can turn into links, and a link's
  // p-value is the worst one seen across the selection sweeps and the retest.
  // A pair pruned during condition selection stays absent no matter how small
  // its retest p-value is. Source-side parents are shifted by the link's lag
  // and dropped when the shift exceeds tau_max, keeping every column inside
  // the shared row range.
  std::vector<std::map<std::pair<int, int>, double>> skeleton(n);
  for (int j = 0; j < n; ++j)
    for (const auto& cand : parents[j])
      skeleton[j][{cand.feature, cand.lag}] = cand.p_value;

  for (int source = 0; source < n; ++source) {
    for (int target = 0; target < n; ++target) {
      for (int lag = 1; lag <= cfg.tau_max; ++lag) {
        std::vector<LaggedVar> zvars;
        for (const auto& v : kept[target]) {
          if (v.feature == source && v.lag == lag) continue;
          zvars.push_back(v);
        }
        for (const auto& v : kept[source]) {
          const int shifted = v.lag + lag;
          if (shifted > cfg.tau_max) continue;
          if (v.feature == source && shifted == lag) continue;
          zvars.push_back({v.feature, shifted});
        }
        zvars = dedupe_sorted(zvars);
        const Vector x = cols.column(source, lag);
        const Vector y = cols.column(target, 0);
        const CiOutcome out = test(x, y, cols.columns(zvars));
        const auto hit = skeleton[target].find({source, lag});
        const bool survived = hit != skeleton[target].end();
        const double p =
            survived ? std::max(out.p_value, hit->second) : out.p_value;
        results.at(source, target, lag) = {survived && p <= cfg.alpha, p,
                                           out.statistic};
      }
    }
  }

  // Contemporaneous skeleton, stable variant: removals within one level are
  // applied only after the whole sweep. Every test conditions on both
  // endpoints' kept lagged parents in addition to the neighbour subset.
  std::vector<PairState> pairs(static_cast<std::size_t>(n) * n);
  auto pair_at = [&](int i, int j) -> PairState& {
    return i < j ? pairs[i * n + j] : pairs[j * n + i];
  };

  for (int level = 0; level <= cfg.max_condition_size; ++level) {
    const auto snapshot = pairs;
    auto snap_at = [&](int i, int j) -> const PairState& {
      return i < j ? snapshot[i * n + j] : snapshot[j * n + i];
    };
    auto snap_neighbours = [&](int node, int excl) {
      std::vector<int> nbrs;
      for (int k = 0; k < n; ++k)
        if (k != node && k != excl && snap_at(node, k).adjacent) nbrs.push_back(k);
      std::stable_sort(nbrs.begin(), nbrs.end(), [&](int a, int b) {
        const double sa = std::abs(snap_at(node, a).stat_at_max);
        const double sb = std::abs(snap_at(node, b).stat_at_max);
        if (sa != sb) return sa > sb;
        return a < b;
      });
      return nbrs;
    };

    bool any_tested = false;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (!snap_at(i, j).adjacent) continue;
        PairState& pair = pair_at(i, j);

        bool removed = false;
        for (int side = 0; side < 2 && !removed; ++side) {
          const auto pool = snap_neighbours(side == 0 ? i : j, side == 0 ? j : i);
          if (static_cast<int>(pool.size()) < level) continue;

          std::vector<int> pick(level);
          for (int b = 0; b < level; ++b) pick[b] = b;
          bool more = true;
          while (more && !removed) {
            if (side == 1 && level == 0) break;  // empty set already tested
            any_tested = true;
            std::vector<int> subset;
            std::vector<LaggedVar> zvars;
            for (int b : pick) {
              subset.push_back(pool[b]);
              zvars.push_back({pool[b], 0});
            }
            std::sort(subset.begin(), subset.end());
            for (const auto& v : kept[i]) zvars.push_back(v);
            for (const auto& v : kept[j]) zvars.push_back(v);
            zvars = dedupe_sorted(zvars);

            const Vector x = cols.column(i, 0);
            const Vector y = cols.column(j, 0);
            const CiOutcome out = test(x, y, cols.columns(zvars));
            if (!pair.tested || out.p_value > pair.max_p) {
              pair.max_p = out.p_value;
              pair.stat_at_max = out.statistic;
            }
            pair.tested = true;
            if (out.p_value > pc_alpha) {
              pair.adjacent = false;
              pair.sepset = subset;
              pair.has_sepset = true;
              removed = true;
            }
            if (level == 0) break;
            more = next_combination(pick, static_cast<int>(pool.size()));
          }
        }
      }
    }
    if (!any_tested) break;
  }

  // Surviving links must also clear the final significance level; with the
  // default pc_alpha == alpha this is a no-op.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const PairState& pair = pair_at(i, j);
      const bool present = pair.adjacent && pair.tested && pair.max_p <= cfg.alpha;
      const LinkTest link{present, pair.tested ? pair.max_p : 1.0,
                          pair.stat_at_max};
      results.at(i, j, 0) = link;
      results.at(j, i, 0) = link;
      if (present) results.set_orientation(i, j, Orientation::kUnoriented);
    }
  }

  // Collider rule on unshielded triples i - k - j with i, j non-adjacent:
  // when k is outside the separating set, both links point at k. Opposing
  // demands freeze the link unoriented.
  auto adjacent0 = [&](int a, int b) {
    return results.at(a, b, 0).present;
  };
  std::vector<signed char> arrow(static_cast<std::size_t>(n) * n, 0);
  std::vector<signed char> frozen(static_cast<std::size_t>(n) * n, 0);
  auto demand = [&](int from, int to) {
    if (frozen[from * n + to]) return;
    if (arrow[to * n + from]) {
      frozen[from * n + to] = frozen[to * n + from] = 1;
      arrow[from * n + to] = arrow[to * n + from] = 0;
      return;
    }
    arrow[from * n + to] = 1;
  };

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (adjacent0(i, j)) continue;
      const PairState& pair = pair_at(i, j);
      if (!pair.has_sepset) continue;
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (!adjacent0(i, k) || !adjacent0(k, j)) continue;
        if (std::binary_search(pair.sepset.begin(), pair.sepset.end(), k))
          continue;
        demand(i, k);
        demand(j, k);
      }
    }
  }

  // Orientation propagation to a fixpoint. An edge is undirected while
  // neither arrow is set and it is not frozen.
  auto oriented = [&](int a, int b) { return arrow[a * n + b] != 0; };
  auto undirected = [&](int a, int b) {
    return adjacent0(a, b) && !oriented(a, b) && !oriented(b, a) &&
           !frozen[a * n + b];
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b || !adjacent0(a, b)) continue;
        if (!undirected(a, b)) continue;
        bool orient_ab = false;
        // a -> b when some c -> a with c, b non-adjacent
        for (int c = 0; c < n && !orient_ab; ++c) {
          if (c == a || c == b) continue;
          if (oriented(c, a) && !adjacent0(c, b)) orient_ab = true;
        }
        // a -> b when a directed path a -> c -> b exists
        for (int c = 0; c < n && !orient_ab; ++c) {
          if (c == a || c == b) continue;
          if (oriented(a, c) && oriented(c, b)) orient_ab = true;
        }
        // a -> b when two non-adjacent undirected neighbours of a both point at b
        for (int c = 0; c < n && !orient_ab; ++c) {
          if (c == a || c == b || !undirected(a, c) || !oriented(c, b)) continue;
          for (int d = c + 1; d < n && !orient_ab; ++d) {
            if (d == a || d == b || !undirected(a, d) || !oriented(d, b)) continue;
            if (!adjacent0(c, d)) orient_ab = true;
          }
        }
        if (orient_ab) {
          demand(a, b);
          changed = true;
        }
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!adjacent0(i, j)) continue;
      if (arrow[i * n + j]) results.set_orientation(i, j, Orientation::kForward);
      else if (arrow[j * n + i])
        results.set_orientation(i, j, Orientation::kBackward);
      else
        results.set_orientation(i, j, Orientation::kUnoriented);
    }
  }

  return results;
}

}  // namespace ctgcn
