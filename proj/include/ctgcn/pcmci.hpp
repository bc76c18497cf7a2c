#pragma once

#include <vector>

#include "ctgcn/ci_test.hpp"
#include "ctgcn/timeseries.hpp"

namespace ctgcn {

struct DiscoveryConfig {
  int tau_max = 1;
  double alpha = 0.05;
  double pc_alpha = 0.0;  // <= 0 means "use alpha"
  int max_condition_size = 3;

  double effective_pc_alpha() const { return pc_alpha > 0.0 ? pc_alpha : alpha; }
  void validate() const;
};

// Orientation of a contemporaneous link between j and k, stored for the
// ordered pair (j, k): kForward means j -> k.
enum class Orientation { kNone, kUnoriented, kForward, kBackward };

struct LinkTest {
  bool present = false;
  double p_value = 1.0;
  double statistic = 0.0;
};

// Test outcomes for every ordered pair (source j, target k) at every lag
// 0..tau_max. Lag-0 entries are symmetric in (j, k); their direction lives in
// the orientation table. Lag-0 self links are never tested and stay absent.
class CausalTestResults {
 public:
  CausalTestResults() = default;
  CausalTestResults(int n_features, int tau_max);

  int n_features() const { return n_; }
  int tau_max() const { return tau_max_; }

  LinkTest& at(int source, int target, int lag);
  const LinkTest& at(int source, int target, int lag) const;

  Orientation orientation(int j, int k) const;
  void set_orientation(int j, int k, Orientation o);

  // Directed presence used by vote aggregation: lagged links as tested;
  // lag-0 links count toward j -> k when oriented that way or unoriented.
  bool directed_link(int source, int target, int lag) const;

 private:
  int index(int source, int target, int lag) const;
  int n_ = 0;
  int tau_max_ = 0;
  std::vector<LinkTest> tests_;
  std::vector<Orientation> orient_;
};

struct ParentCandidate {
  int feature = 0;
  int lag = 1;
  double statistic = 0.0;   // from the latest sweep, drives candidate order
  double p_value = 0.0;     // largest p-value seen across all sweeps
};

// One entry per target feature, each holding the lagged parents that survive
// the iterative condition-selection phase, sorted by (feature, lag).
using ParentSets = std::vector<std::vector<ParentCandidate>>;

// Phase one: per-target elimination of lagged candidates. At iteration p each
// surviving candidate is tested conditioned on the p strongest others (by
// |statistic| from the previous sweep, ties broken by feature then lag);
// removals apply only after the full sweep.
ParentSets discover_lagged_parents(const TimeSeriesDataset& ds,
                                   const DiscoveryConfig& cfg,
                                   const CiTestFn& ci = {},
                                   std::vector<std::string>* warnings = nullptr);

// Full discovery: lagged links from momentary-conditional-independence tests
// against both variables' parent sets, then a contemporaneous skeleton over
// subsets of neighbours (always conditioning on the lagged parents), collider
// detection, and orientation propagation. Conflicting orientation evidence
// leaves a link unoriented.
CausalTestResults discover_full_graph(const TimeSeriesDataset& ds,
                                      const DiscoveryConfig& cfg,
                                      const CiTestFn& ci = {},
                                      std::vector<std::string>* warnings = nullptr);

}  // namespace ctgcn
