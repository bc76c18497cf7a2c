#include "ctgcn/synthgen.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>

#include "ctgcn/rng.hpp"

namespace ctgcn {

namespace {

std::vector<std::string> default_names(int n,
                                       const std::vector<std::string>& given) {
  if (!given.empty()) return given;
  std::vector<std::string> names(n);
  for (int i = 0; i < n; ++i) names[i] = "x" + std::to_string(i);
  return names;
}

// Topological order of the contemporaneous subgraph; throws on cycles.
std::vector<int> contemporaneous_order(const ScmSpec& spec) {
  const int n = spec.n_features;
  std::vector<std::vector<int>> out_edges(n);
  std::vector<int> in_degree(n, 0);
  for (const auto& e : spec.edges) {
    if (e.lag != 0) continue;
    out_edges[e.src].push_back(e.dst);
    ++in_degree[e.dst];
  }
  std::vector<int> order;
  std::vector<int> ready;
  for (int i = 0; i < n; ++i)
    if (in_degree[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end());
    const int v = ready.front();
    ready.erase(ready.begin());
    order.push_back(v);
    for (int w : out_edges[v])
      if (--in_degree[w] == 0) ready.push_back(w);
  }
  if (static_cast<int>(order.size()) != n)
    throw ConfigError("contemporaneous edges form a cycle");
  return order;
}

CausalAdjacency truth_from_edges(int n, const std::vector<ScmEdge>& edges,
                                 const std::vector<std::string>& names) {
  CausalAdjacency truth;
  truth.feature_names = names;
  truth.directed = true;
  truth.weights = Matrix::Zero(n, n);
  for (const auto& e : edges) {
    if (e.src == e.dst) continue;  // self lags are autocorrelation, not edges
    truth.weights(e.src, e.dst) = 1.0;
  }
  return truth;
}

}  // namespace

int ScmSpec::max_lag() const {
  int m = 0;
  for (const auto& e : edges) m = std::max(m, e.lag);
  return m;
}

void ScmSpec::validate() const {
  if (n_features < 1) throw ConfigError("model needs at least one feature");
  if (!noise_std.empty() &&
      static_cast<int>(noise_std.size()) != n_features)
    throw ConfigError("noise_std must list one entry per feature");
  for (double s : noise_std)
    if (!(s > 0)) throw ConfigError("noise_std entries must be positive");
  if (!feature_names.empty() &&
      static_cast<int>(feature_names.size()) != n_features)
    throw ConfigError("feature_names must list one entry per feature");
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= n_features || e.dst < 0 || e.dst >= n_features)
      throw ConfigError("edge endpoint out of range");
    if (e.lag < 0) throw ConfigError("edge lag must be >= 0");
    if (e.lag == 0 && e.src == e.dst)
      throw ConfigError("contemporaneous self edge");
    if (!seen.insert({e.src, e.dst, e.lag}).second)
      throw ConfigError("duplicate edge (" + std::to_string(e.src) + " -> " +
                        std::to_string(e.dst) + ", lag " +
                        std::to_string(e.lag) + ")");
  }
  contemporaneous_order(*this);
}

double scm_spectral_radius(const ScmSpec& spec) {
  spec.validate();
  const int n = spec.n_features;
  const int max_lag = spec.max_lag();
  if (max_lag == 0) return 0.0;

  // Fold contemporaneous effects into the lag matrices: with x_t = B0 x_t +
  // sum_tau Btau x_{t-tau} + eps, the reduced form uses (I - B0)^-1 Btau.
  Matrix b0 = Matrix::Zero(n, n);
  std::vector<Matrix> blag(max_lag, Matrix::Zero(n, n));
  for (const auto& e : spec.edges) {
    if (e.lag == 0) b0(e.dst, e.src) += e.coeff;
    else blag[e.lag - 1](e.dst, e.src) += e.coeff;
  }
  const Matrix inv = (Matrix::Identity(n, n) - b0).inverse();

  Matrix companion = Matrix::Zero(n * max_lag, n * max_lag);
  for (int tau = 1; tau <= max_lag; ++tau)
    companion.block(0, (tau - 1) * n, n, n) = inv * blag[tau - 1];
  for (int r = 1; r < max_lag; ++r)
    companion.block(r * n, (r - 1) * n, n, n) = Matrix::Identity(n, n);

  const Eigen::EigenSolver<Matrix> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SyntheticData generate_scm_dataset(const ScmSpec& spec, int n_samples,
                                   std::uint64_t seed, int burn_in) {
  spec.validate();
  if (n_samples < 2) throw ConfigError("n_samples must be >= 2");
  if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
  const double radius = scm_spectral_radius(spec);
  if (radius >= 1.0)
    throw ConfigError("unstable model: spectral radius " +
                      std::to_string(radius));

  const int n = spec.n_features;
  const int max_lag = spec.max_lag();
  const auto order = contemporaneous_order(spec);

  std::vector<std::vector<ScmEdge>> into(n);
  for (const auto& e : spec.edges) into[e.dst].push_back(e);

  std::vector<double> noise(n, 1.0);
  if (!spec.noise_std.empty()) noise = spec.noise_std;

  Rng rng(seed);
  const int total = burn_in + n_samples;
  Matrix values = Matrix::Zero(n, total + max_lag);

  for (int t = max_lag; t < total + max_lag; ++t) {
    for (int idx : order) {
      double v = noise[idx] * rng.normal();
      for (const auto& e : into[idx])
        v += e.coeff * values(e.src, t - e.lag);
      values(idx, t) = v;
    }
  }

  SyntheticData out;
  out.dataset.feature_names = default_names(n, spec.feature_names);
  out.dataset.sample_interval = 1.0;
  out.dataset.values = values.rightCols(n_samples);
  out.truth = truth_from_edges(n, spec.edges, out.dataset.feature_names);
  return out;
}

void DiffusionSpec::validate() const {
  if (graph.rows() < 1 || graph.rows() != graph.cols())
    throw ConfigError("diffusion graph must be square and non-empty");
  if ((graph.array() < 0).any())
    throw ConfigError("diffusion graph weights must be nonnegative");
  if (!(rate >= 0 && rate <= 1))
    throw ConfigError("rate must lie in [0, 1], got " + std::to_string(rate));
  if (!(leak > 0 && leak < 1))
    throw ConfigError("leak must lie in (0, 1), got " + std::to_string(leak));
  if (!(noise_std > 0)) throw ConfigError("noise_std must be positive");
  if (!feature_names.empty() &&
      static_cast<int>(feature_names.size()) != graph.rows())
    throw ConfigError("feature_names must list one entry per node");
}

SyntheticData generate_diffusion_dataset(const DiffusionSpec& spec,
                                         int n_samples, std::uint64_t seed,
                                         int burn_in) {
  spec.validate();
  if (n_samples < 2) throw ConfigError("n_samples must be >= 2");
  const int n = static_cast<int>(spec.graph.rows());

  // Row-normalize; isolated nodes keep their own value instead of mixing.
  Matrix mix = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) row_sum += spec.graph(i, j);
    if (row_sum > 0.0) {
      for (int j = 0; j < n; ++j)
        if (j != i) mix(i, j) = spec.graph(i, j) / row_sum;
    } else {
      mix(i, i) = 1.0;
    }
  }

  Rng rng(seed);
  Vector state = Vector::Zero(n);
  const int total = burn_in + n_samples;
  Matrix values(n, n_samples);
  for (int t = 0; t < total; ++t) {
    Vector next = (1.0 - spec.leak) *
                  ((1.0 - spec.rate) * state + spec.rate * (mix * state));
    for (int i = 0; i < n; ++i) next[i] += spec.noise_std * rng.normal();
    state = next;
    if (t >= burn_in) values.col(t - burn_in) = state;
  }

  SyntheticData out;
  out.dataset.feature_names = default_names(n, spec.feature_names);
  out.dataset.sample_interval = 1.0;
  out.dataset.values = values;
  out.truth.feature_names = out.dataset.feature_names;
  out.truth.directed = true;
  out.truth.weights = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && spec.graph(i, j) > 0)
        out.truth.weights(j, i) = 1.0;  // j's value flows into i's update
  return out;
}

}  // namespace ctgcn
