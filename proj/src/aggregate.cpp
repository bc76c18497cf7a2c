#include "ctgcn/aggregate.hpp"

#include <cmath>
#include <fstream>

#include "ctgcn/rng.hpp"

namespace ctgcn {

const char* to_string(VoteMode mode) {
  switch (mode) {
    case VoteMode::kAnyLag: return "any-lag";
    case VoteMode::kMajorityLag: return "mv-lag";
  }
  return "?";
}

const char* to_string(AggregationStrategy strategy) {
  switch (strategy) {
    case AggregationStrategy::kAnyWeighted: return "ANY;W";
    case AggregationStrategy::kMajorityWeighted: return "MT;W";
    case AggregationStrategy::kAnyUnweighted: return "ANY;UW";
    case AggregationStrategy::kMajorityUnweighted: return "MT;UW";
  }
  return "?";
}

VoteMode vote_mode_from_string(const std::string& s) {
  if (s == "any-lag") return VoteMode::kAnyLag;
  if (s == "mv-lag") return VoteMode::kMajorityLag;
  throw ConfigError("unknown vote mode '" + s + "' (any-lag, mv-lag)");
}

AggregationStrategy strategy_from_string(const std::string& s) {
  if (s == "ANY;W") return AggregationStrategy::kAnyWeighted;
  if (s == "MT;W") return AggregationStrategy::kMajorityWeighted;
  if (s == "ANY;UW") return AggregationStrategy::kAnyUnweighted;
  if (s == "MT;UW") return AggregationStrategy::kMajorityUnweighted;
  throw ConfigError("unknown aggregation strategy '" + s +
                    "' (ANY;W, MT;W, ANY;UW, MT;UW)");
}

void validate_adjacency(const CausalAdjacency& adj) {
  const int n = adj.n_nodes();
  if (adj.weights.cols() != n) throw DataError("adjacency matrix must be square");
  if (static_cast<int>(adj.feature_names.size()) != n)
    throw DataError("adjacency names do not match matrix size");
  for (int i = 0; i < n; ++i) {
    if (adj.weights(i, i) != 0.0)
      throw DataError("adjacency diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (adj.weights(i, j) < 0.0)
        throw DataError("adjacency weights must be nonnegative");
      if (!adj.directed && adj.weights(i, j) != adj.weights(j, i))
        throw DataError("undirected adjacency must be symmetric");
    }
  }
}

Eigen::MatrixXi vote_sample_set(const CausalTestResults& results,
                                VoteMode mode) {
  const int n = results.n_features();
  const int lags = results.tau_max() + 1;
  Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      int hits = 0;
      for (int lag = 0; lag < lags; ++lag)
        if (results.directed_link(j, k, lag)) ++hits;
      const bool vote = mode == VoteMode::kAnyLag
                            ? hits > 0
                            : hits > lags / 2.0;
      votes(j, k) = vote ? 1 : 0;
    }
  }
  return votes;
}

namespace {

double majority_scale(const VoteTensor& votes) {
  if (votes.n_periods <= 0)
    throw DataError("vote tensor reports no temporal periods");
  return static_cast<double>(votes.n_periods);
}

}  // namespace

CausalAdjacency build_adjacency(const VoteTensor& votes,
                                AggregationStrategy strategy) {
  const int n = votes.n_features();
  if (n < 1) throw DataError("vote tensor has no features");
  for (const auto& set : votes.sets)
    if (set.votes.rows() != n || set.votes.cols() != n)
      throw DataError("vote matrix shape does not match feature count");

  Matrix sum = Matrix::Zero(n, n);
  for (const auto& set : votes.sets) sum += set.votes.cast<double>();
  sum.diagonal().setZero();

  CausalAdjacency adj;
  adj.feature_names = votes.feature_names;
  adj.directed = true;
  switch (strategy) {
    case AggregationStrategy::kAnyWeighted:
      adj.weights = sum;
      break;
    case AggregationStrategy::kMajorityWeighted: {
      const double t = majority_scale(votes);
      adj.weights = (sum.array() / t > 0.5).select(sum, Matrix::Zero(n, n));
      break;
    }
    case AggregationStrategy::kAnyUnweighted:
      adj.weights = (sum.array() > 0.0).select(Matrix::Ones(n, n), Matrix::Zero(n, n));
      break;
    case AggregationStrategy::kMajorityUnweighted: {
      const double t = majority_scale(votes);
      adj.weights =
          (sum.array() / t > 0.5).select(Matrix::Ones(n, n), Matrix::Zero(n, n));
      break;
    }
  }
  adj.weights.diagonal().setZero();
  return adj;
}

CausalAdjacency to_undirected(const CausalAdjacency& adj) {
  validate_adjacency(adj);
  CausalAdjacency out;
  out.feature_names = adj.feature_names;
  out.directed = false;
  const int n = adj.n_nodes();
  out.weights = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && adj.weights(i, j) + adj.weights(j, i) > 0.0) {
        out.weights(i, j) = 1.0;
        out.weights(j, i) = 1.0;
      }
  return out;
}

CausalAdjacency distance_adjacency(const Matrix& distances,
                                   const std::vector<std::string>& names,
                                   double variance, double threshold) {
  const int n = static_cast<int>(distances.rows());
  if (distances.cols() != n) throw DataError("distance matrix must be square");
  if (static_cast<int>(names.size()) != n)
    throw DataError("name count does not match distance matrix");
  if (!(variance > 0)) throw ConfigError("variance must be positive");
  if (!(threshold >= 0)) throw ConfigError("threshold must be nonnegative");

  CausalAdjacency adj;
  adj.feature_names = names;
  adj.directed = false;
  adj.weights = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = distances(i, j);
      const double w = std::exp(-(d * d) / variance);
      if (w >= threshold) adj.weights(i, j) = w;
    }
  }
  return adj;
}

nlohmann::json adjacency_to_json(const CausalAdjacency& adj) {
  validate_adjacency(adj);
  nlohmann::json j;
  j["nodes"] = adj.feature_names;
  j["directed"] = adj.directed;
  j["edges"] = nlohmann::json::array();
  const int n = adj.n_nodes();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (adj.weights(a, b) == 0.0) continue;
      if (!adj.directed && b < a) continue;
      j["edges"].push_back({{"src", adj.feature_names[a]},
                            {"dst", adj.feature_names[b]},
                            {"weight", adj.weights(a, b)}});
    }
  }
  return j;
}

CausalAdjacency adjacency_from_json(const nlohmann::json& j) {
  if (!j.contains("nodes") || !j["nodes"].is_array())
    throw DataError("adjacency document lacks nodes array");
  CausalAdjacency adj;
  for (const auto& n : j["nodes"]) adj.feature_names.push_back(n.get<std::string>());
  const int n = static_cast<int>(adj.feature_names.size());
  adj.directed = j.value("directed", true);
  adj.weights = Matrix::Zero(n, n);
  auto index_of = [&](const std::string& name) {
    for (int i = 0; i < n; ++i)
      if (adj.feature_names[i] == name) return i;
    throw DataError("adjacency edge names unknown node '" + name + "'");
  };
  for (const auto& e : j.value("edges", nlohmann::json::array())) {
    const int a = index_of(e.at("src").get<std::string>());
    const int b = index_of(e.at("dst").get<std::string>());
    const double w = e.at("weight").get<double>();
    adj.weights(a, b) = w;
    if (!adj.directed) adj.weights(b, a) = w;
  }
  validate_adjacency(adj);
  return adj;
}

void write_adjacency_json(const CausalAdjacency& adj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << adjacency_to_json(adj).dump(2) << "\n";
}

CausalAdjacency load_adjacency_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return adjacency_from_json(j);
}

void write_adjacency_csv(const CausalAdjacency& adj, const std::string& path) {
  validate_adjacency(adj);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "src,dst,weight\n";
  char buf[64];
  const int n = adj.n_nodes();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (adj.weights(a, b) == 0.0) continue;
      if (!adj.directed && b < a) continue;
      std::snprintf(buf, sizeof buf, "%.17g", adj.weights(a, b));
      out << adj.feature_names[a] << "," << adj.feature_names[b] << "," << buf
          << "\n";
    }
  }
}

void write_adjacency_dot(const CausalAdjacency& adj, const std::string& path) {
  validate_adjacency(adj);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const char* arrow = adj.directed ? " -> " : " -- ";
  out << (adj.directed ? "digraph" : "graph") << " causal {\n";
  for (const auto& name : adj.feature_names)
    out << "  \"" << name << "\";\n";
  const int n = adj.n_nodes();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (adj.weights(a, b) == 0.0) continue;
      if (!adj.directed && b < a) continue;
      out << "  \"" << adj.feature_names[a] << "\"" << arrow << "\""
          << adj.feature_names[b] << "\" [label=\"" << adj.weights(a, b)
          << "\"];\n";
    }
  }
  out << "}\n";
}

std::uint64_t adjacency_fingerprint(const Matrix& weights) {
  std::uint64_t h = 1469598103934665603ull;
  const std::uint64_t rows = static_cast<std::uint64_t>(weights.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(weights.cols());
  h = fnv1a64(&rows, sizeof rows, h);
  h = fnv1a64(&cols, sizeof cols, h);
  for (Eigen::Index c = 0; c < weights.cols(); ++c) {
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
      const double v = weights(r, c);
      h = fnv1a64(&v, sizeof v, h);
    }
  }
  return h;
}

}  // namespace ctgcn
