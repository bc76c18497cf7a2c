#include "ctgcn/decompose.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "ctgcn/parallel.hpp"

namespace ctgcn {

Clustering trivial_clustering(int n_features) {
  Clustering c;
  c.assignment.assign(n_features, 0);
  c.medoids.assign(1, 0);
  c.inertia = 0.0;
  return c;
}

DecompositionPlan plan_subproblems(const TimeSeriesDataset& ds, int period_len,
                                   const Clustering& clustering,
                                   const DiscoveryConfig& cfg) {
  cfg.validate();
  validate_dataset(ds);
  if (static_cast<int>(clustering.assignment.size()) != ds.n_features())
    throw DataError("clustering covers " +
                    std::to_string(clustering.assignment.size()) +
                    " features, dataset has " +
                    std::to_string(ds.n_features()));
  if (period_len < cfg.tau_max + 10)
    throw ConfigError("period length " + std::to_string(period_len) +
                      " is too short for tau_max " +
                      std::to_string(cfg.tau_max) + "; need at least " +
                      std::to_string(cfg.tau_max + 10));

  DecompositionPlan plan;
  plan.period_len = period_len;
  plan.n_features = ds.n_features();
  plan.config = cfg;
  plan.feature_names = ds.feature_names;
  if (period_len < 3 * cfg.tau_max)
    plan.warnings.push_back("period length " + std::to_string(period_len) +
                            " is below 3x tau_max " +
                            std::to_string(cfg.tau_max));

  PeriodSplit split = split_periods(ds, period_len);
  plan.n_periods = static_cast<int>(split.periods.size());
  plan.dropped_samples = split.dropped_samples;
  if (split.dropped_samples > 0)
    plan.warnings.push_back("dropped " +
                            std::to_string(split.dropped_samples) +
                            " trailing samples past the last full period");

  const auto groups = clustering.members();
  plan.n_clusters = static_cast<int>(groups.size());

  for (int t = 0; t < plan.n_periods; ++t) {
    for (int c = 0; c < plan.n_clusters; ++c) {
      const auto& members = groups[c];
      if (members.empty()) {
        plan.skipped.push_back({t, c, "empty cluster"});
        continue;
      }
      if (members.size() == 1) {
        plan.skipped.push_back(
            {t, c, "single feature " + ds.feature_names[members[0]] +
                       ", no pairs to test"});
        continue;
      }
      Subproblem sp;
      sp.period_index = t;
      sp.cluster_id = c;
      sp.features = members;
      sp.data.feature_names.reserve(members.size());
      sp.data.sample_interval = ds.sample_interval;
      sp.data.values.resize(static_cast<Eigen::Index>(members.size()),
                            period_len);
      for (std::size_t r = 0; r < members.size(); ++r) {
        sp.data.feature_names.push_back(ds.feature_names[members[r]]);
        sp.data.values.row(static_cast<Eigen::Index>(r)) =
            split.periods[t].values.row(members[r]);
      }
      plan.subproblems.push_back(std::move(sp));
    }
  }
  return plan;
}

DiscoveryRunResult execute_subproblems(const DecompositionPlan& plan,
                                       int workers) {
  if (workers < 1) throw ConfigError("workers must be >= 1");

  DiscoveryRunResult run;
  run.feature_names = plan.feature_names;
  run.n_periods = plan.n_periods;
  run.n_clusters = plan.n_clusters;
  run.tau_max = plan.config.tau_max;
  run.alpha = plan.config.alpha;
  run.skipped = plan.skipped;
  run.warnings = plan.warnings;
  run.outcomes.resize(plan.subproblems.size());

  const auto t0 = std::chrono::steady_clock::now();
  parallel_for_index(
      static_cast<int>(plan.subproblems.size()), workers, [&](int i) {
        const Subproblem& sp = plan.subproblems[i];
        SubproblemOutcome& out = run.outcomes[i];
        out.period_index = sp.period_index;
        out.cluster_id = sp.cluster_id;
        out.features = sp.features;
        const auto start = std::chrono::steady_clock::now();
        try {
          out.results = discover_full_graph(sp.data, plan.config);
        } catch (const std::exception& e) {
          out.error = "period " + std::to_string(sp.period_index) +
                      ", cluster " + std::to_string(sp.cluster_id) + ": " +
                      e.what();
        }
        out.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
      });
  run.total_wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return run;
}

nlohmann::json discovery_results_json(const DiscoveryRunResult& run) {
  nlohmann::json j;
  j["features"] = run.feature_names;
  j["n_periods"] = run.n_periods;
  j["n_clusters"] = run.n_clusters;
  j["tau_max"] = run.tau_max;
  j["alpha"] = run.alpha;
  j["warnings"] = run.warnings;

  j["skipped"] = nlohmann::json::array();
  for (const auto& s : run.skipped)
    j["skipped"].push_back({{"period", s.period_index},
                            {"cluster", s.cluster_id},
                            {"reason", s.reason}});

  j["subproblems"] = nlohmann::json::array();
  for (const auto& out : run.outcomes) {
    nlohmann::json sp;
    sp["period"] = out.period_index;
    sp["cluster"] = out.cluster_id;
    nlohmann::json feats = nlohmann::json::array();
    for (int f : out.features) feats.push_back(run.feature_names.at(f));
    sp["features"] = feats;
    if (!out.error.empty()) {
      sp["error"] = out.error;
      j["subproblems"].push_back(sp);
      continue;
    }
    nlohmann::json links = nlohmann::json::array();
    const CausalTestResults& res = *out.results;
    const int n = res.n_features();
    for (int lag = 0; lag <= res.tau_max(); ++lag) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a == b && lag == 0) continue;
          if (!res.directed_link(a, b, lag)) continue;
          const LinkTest& link = res.at(a, b, lag);
          links.push_back({{"src", run.feature_names.at(out.features[a])},
                           {"dst", run.feature_names.at(out.features[b])},
                           {"lag", lag},
                           {"p", link.p_value},
                           {"stat", link.statistic}});
        }
      }
    }
    sp["links"] = links;
    j["subproblems"].push_back(sp);
  }
  return j;
}

nlohmann::json discovery_timings_json(const DiscoveryRunResult& run) {
  nlohmann::json j;
  j["total_seconds"] = run.total_wall_seconds;
  j["subproblems"] = nlohmann::json::array();
  for (const auto& out : run.outcomes)
    j["subproblems"].push_back({{"period", out.period_index},
                                {"cluster", out.cluster_id},
                                {"seconds", out.wall_seconds}});
  return j;
}

void write_discovery_results(const DiscoveryRunResult& run,
                             const std::string& results_path,
                             const std::string& timings_path) {
  std::ofstream res(results_path);
  if (!res) throw DataError("cannot write " + results_path);
  res << discovery_results_json(run).dump(2) << "\n";
  std::ofstream tim(timings_path);
  if (!tim) throw DataError("cannot write " + timings_path);
  tim << discovery_timings_json(run).dump(2) << "\n";
}

DiscoveryRunResult discovery_results_from_json(const nlohmann::json& j) {
  DiscoveryRunResult run;
  for (const auto& f : j.at("features")) run.feature_names.push_back(f);
  run.n_periods = j.at("n_periods").get<int>();
  run.n_clusters = j.value("n_clusters", 0);
  run.tau_max = j.at("tau_max").get<int>();
  run.alpha = j.value("alpha", 0.0);
  for (const auto& w : j.value("warnings", nlohmann::json::array()))
    run.warnings.push_back(w);
  for (const auto& s : j.value("skipped", nlohmann::json::array()))
    run.skipped.push_back({s.at("period").get<int>(), s.at("cluster").get<int>(),
                           s.value("reason", "")});

  auto global_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < run.feature_names.size(); ++i)
      if (run.feature_names[i] == name) return static_cast<int>(i);
    throw DataError("discovery results name unknown feature '" + name + "'");
  };

  for (const auto& sp : j.at("subproblems")) {
    SubproblemOutcome out;
    out.period_index = sp.at("period").get<int>();
    out.cluster_id = sp.at("cluster").get<int>();
    for (const auto& f : sp.at("features"))
      out.features.push_back(global_index(f.get<std::string>()));
    if (sp.contains("error")) {
      out.error = sp["error"].get<std::string>();
      run.outcomes.push_back(std::move(out));
      continue;
    }
    const int n = static_cast<int>(out.features.size());
    CausalTestResults res(n, run.tau_max);
    auto local_index = [&](int global) {
      for (int i = 0; i < n; ++i)
        if (out.features[i] == global) return i;
      throw DataError("link endpoint outside sub-problem features");
    };
    // Lag-0 entries may appear once (oriented) or twice (unoriented); the
    // second sighting upgrades the pair to unoriented.
    for (const auto& link : sp.value("links", nlohmann::json::array())) {
      const int a = local_index(global_index(link.at("src").get<std::string>()));
      const int b = local_index(global_index(link.at("dst").get<std::string>()));
      const int lag = link.at("lag").get<int>();
      const double p = link.at("p").get<double>();
      const double stat = link.at("stat").get<double>();
      if (lag < 0 || lag > run.tau_max)
        throw DataError("link lag " + std::to_string(lag) + " out of range");
      if (lag > 0) {
        res.at(a, b, lag) = {true, p, stat};
        continue;
      }
      const bool reverse_known = res.at(b, a, 0).present;
      res.at(a, b, 0) = {true, p, stat};
      res.at(b, a, 0) = {true, p, stat};
      res.set_orientation(a, b, reverse_known ? Orientation::kUnoriented
                                              : Orientation::kForward);
    }
    out.results = std::move(res);
    run.outcomes.push_back(std::move(out));
  }
  return run;
}

DiscoveryRunResult load_discovery_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    return discovery_results_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

VoteTensor collect_votes(const DiscoveryRunResult& run, VoteMode mode) {
  VoteTensor tensor;
  tensor.feature_names = run.feature_names;
  tensor.n_periods = run.n_periods;
  const int n = static_cast<int>(run.feature_names.size());
  for (const auto& out : run.outcomes) {
    if (!out.results) continue;  // failed sub-problems contribute no votes
    const Eigen::MatrixXi local = vote_sample_set(*out.results, mode);
    VoteMatrix vm;
    vm.period_index = out.period_index;
    vm.cluster_id = out.cluster_id;
    vm.votes = Eigen::MatrixXi::Zero(n, n);
    for (int a = 0; a < local.rows(); ++a)
      for (int b = 0; b < local.cols(); ++b)
        if (local(a, b))
          vm.votes(out.features[a], out.features[b]) = 1;
    tensor.sets.push_back(std::move(vm));
  }
  return tensor;
}

}  // namespace ctgcn
