#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctgcn/aggregate.hpp"
#include "ctgcn/timeseries.hpp"

namespace ctgcn {

struct ScmEdge {
  int src = 0;
  int dst = 0;
  int lag = 1;  // 0 is contemporaneous
  double coeff = 0.0;
};

// Linear structural model: each feature is a weighted sum of its (possibly
// contemporaneous) parents plus independent Gaussian noise. Contemporaneous
// edges must form a DAG.
struct ScmSpec {
  int n_features = 0;
  std::vector<ScmEdge> edges;
  std::vector<double> noise_std;  // empty means all 1.0
  std::vector<std::string> feature_names;  // empty means x0, x1, ...

  int max_lag() const;
  void validate() const;
};

struct SyntheticData {
  TimeSeriesDataset dataset;
  CausalAdjacency truth;  // directed, inter-node edges only
};

// Spectral radius of the model's companion matrix after contemporaneous
// effects are folded in; stable models stay strictly below 1.
double scm_spectral_radius(const ScmSpec& spec);

// Simulates n_samples steps after discarding burn_in. Throws ConfigError for
// cyclic contemporaneous structure or spectral radius >= 1.
SyntheticData generate_scm_dataset(const ScmSpec& spec, int n_samples,
                                   std::uint64_t seed, int burn_in = 500);

// Graph diffusion: states relax toward a row-stochastic mix of neighbour
// values. rate blends self against neighbours, leak pulls toward zero so the
// process has a stationary distribution even though the mix itself preserves
// mass.
struct DiffusionSpec {
  Matrix graph;  // nonnegative weights, diagonal ignored
  double rate = 0.3;
  double noise_std = 0.1;
  double leak = 0.05;
  std::vector<std::string> feature_names;

  void validate() const;
};

SyntheticData generate_diffusion_dataset(const DiffusionSpec& spec,
                                         int n_samples, std::uint64_t seed,
                                         int burn_in = 500);

}  // namespace ctgcn
