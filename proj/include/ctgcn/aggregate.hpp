#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ctgcn/errors.hpp"
#include "ctgcn/pcmci.hpp"
#include "ctgcn/timeseries.hpp"

namespace ctgcn {

// How one sub-problem's per-lag link decisions collapse to a single vote.
enum class VoteMode {
  kAnyLag,       // vote 1 when any lag 0..tau_max carries a significant link
  kMajorityLag,  // vote 1 when more than half of the lags do
};

// How votes across sub-problems combine into adjacency weights.
enum class AggregationStrategy {
  kAnyWeighted,       // sum of votes
  kMajorityWeighted,  // sum of votes, kept only where votes > T/2
  kAnyUnweighted,     // 1 where any vote
  kMajorityUnweighted // 1 where votes > T/2
};

const char* to_string(VoteMode mode);
const char* to_string(AggregationStrategy strategy);
VoteMode vote_mode_from_string(const std::string& s);
AggregationStrategy strategy_from_string(const std::string& s);

// Weighted adjacency over named nodes. weights(j, k) is the weight of edge
// j -> k; the diagonal is always zero. Undirected graphs keep a symmetric
// matrix and set directed = false.
struct CausalAdjacency {
  std::vector<std::string> feature_names;
  Matrix weights;
  bool directed = true;

  int n_nodes() const { return static_cast<int>(weights.rows()); }
};

void validate_adjacency(const CausalAdjacency& adj);

// One sub-problem's binary vote matrix, expanded to global node indices.
// Entries outside the sub-problem's feature set are zero.
struct VoteMatrix {
  int period_index = 0;
  int cluster_id = 0;
  Eigen::MatrixXi votes;
};

struct VoteTensor {
  std::vector<std::string> feature_names;
  int n_periods = 0;
  std::vector<VoteMatrix> sets;

  int n_features() const { return static_cast<int>(feature_names.size()); }
};

// Collapses one sub-problem's per-lag decisions into a binary vote matrix
// over its own feature indices. Lag-0 links count toward the direction they
// are oriented in; unoriented links count toward both.
Eigen::MatrixXi vote_sample_set(const CausalTestResults& results, VoteMode mode);

// Sums votes over every sample set, then applies the strategy. The majority
// threshold divides by the number of temporal periods, not the number of
// sample sets, so spatial decomposition does not dilute the majority.
CausalAdjacency build_adjacency(const VoteTensor& votes,
                                AggregationStrategy strategy);

// Collapses j->k and k->j into one undirected edge with binary weight.
CausalAdjacency to_undirected(const CausalAdjacency& adj);

// Gaussian kernel adjacency from a pairwise distance matrix: weight
// exp(-d^2 / variance) where that value reaches the threshold, zero on the
// diagonal and wherever the kernel falls below the threshold.
CausalAdjacency distance_adjacency(const Matrix& distances,
                                   const std::vector<std::string>& names,
                                   double variance, double threshold);

nlohmann::json adjacency_to_json(const CausalAdjacency& adj);
CausalAdjacency adjacency_from_json(const nlohmann::json& j);
void write_adjacency_json(const CausalAdjacency& adj, const std::string& path);
CausalAdjacency load_adjacency_json(const std::string& path);

// Edge list CSV: src,dst,weight rows in row-major node order.
void write_adjacency_csv(const CausalAdjacency& adj, const std::string& path);

// Graphviz export; directed graphs use digraph/->, undirected graph/--.
void write_adjacency_dot(const CausalAdjacency& adj, const std::string& path);

// 64-bit content hash of dimensions and weight bytes; stable across runs.
std::uint64_t adjacency_fingerprint(const Matrix& weights);

}  // namespace ctgcn
