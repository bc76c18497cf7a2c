#include "ctgcn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "ctgcn/rng.hpp"

namespace ctgcn {

namespace {

constexpr double kLossEpsilon = 1e-12;
constexpr int kCheckpointVersion = 1;

// Mean-pooled input patches: M(n, u) averages X(n, u + p) over the np valid
// conv positions p, so conv + mean pool collapses to M * K^T + bias.
Matrix pooled_patches(Eigen::Ref<const Matrix> window, int kernel_width) {
  const int n = static_cast<int>(window.rows());
  const int np = static_cast<int>(window.cols()) - kernel_width + 1;
  Matrix m(n, kernel_width);
  for (int u = 0; u < kernel_width; ++u)
    m.col(u) = window.middleCols(u, np).rowwise().mean();
  return m;
}

struct ForwardPass {
  Matrix m;    // n x kernel_width
  Matrix xp;   // n x channels
  Matrix g0;   // n x channels
  Matrix p0;   // n x hidden
  Matrix r;    // n x hidden
  Matrix g1;   // n x hidden
  Matrix h;    // n x hidden_out
  Matrix y;    // n x horizon
};

ForwardPass run_forward(const CtgcnModel& model, const NormalizedAdjacency& adj,
                        Eigen::Ref<const Matrix> window) {
  ForwardPass f;
  f.m = pooled_patches(window, model.shape.kernel_width);
  f.xp = f.m * model.conv_kernel.transpose();
  f.xp.rowwise() += model.conv_bias.transpose();
  f.g0 = adj.a_hat * f.xp;
  f.p0 = f.g0 * model.w0;
  f.r = f.p0.cwiseMax(0.0);
  f.g1 = adj.a_hat * f.r;
  f.h = f.g1 * model.w1;
  f.y = f.h * model.head_w;
  f.y.rowwise() += model.head_b.transpose();
  return f;
}

Gradients zero_gradients(const CtgcnModel& model) {
  Gradients g;
  g.conv_kernel = Matrix::Zero(model.conv_kernel.rows(), model.conv_kernel.cols());
  g.conv_bias = Vector::Zero(model.conv_bias.size());
  g.w0 = Matrix::Zero(model.w0.rows(), model.w0.cols());
  g.w1 = Matrix::Zero(model.w1.rows(), model.w1.cols());
  g.head_w = Matrix::Zero(model.head_w.rows(), model.head_w.cols());
  g.head_b = Vector::Zero(model.head_b.size());
  return g;
}

void check_window_shape(const CtgcnModel& model, const NormalizedAdjacency& adj,
                        Eigen::Ref<const Matrix> window) {
  if (window.rows() != model.shape.n_nodes)
    throw DataError("window has " + std::to_string(window.rows()) +
                    " nodes, model expects " +
                    std::to_string(model.shape.n_nodes));
  if (window.cols() != model.shape.history_len)
    throw DataError("window has " + std::to_string(window.cols()) +
                    " steps, model expects " +
                    std::to_string(model.shape.history_len));
  if (adj.a_hat.rows() != model.shape.n_nodes ||
      adj.a_hat.cols() != model.shape.n_nodes)
    throw DataError("adjacency is " + std::to_string(adj.a_hat.rows()) + "x" +
                    std::to_string(adj.a_hat.cols()) + ", model expects " +
                    std::to_string(model.shape.n_nodes) + " nodes");
}

bool model_finite(const CtgcnModel& m) {
  return m.conv_kernel.allFinite() && m.conv_bias.allFinite() &&
         m.w0.allFinite() && m.w1.allFinite() && m.head_w.allFinite() &&
         m.head_b.allFinite();
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw DataError("checkpoint matrix must be an array of arrays");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols)
      throw DataError("checkpoint matrix rows have uneven lengths");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("checkpoint vector must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

NormalizedAdjacency normalize_adjacency(const Matrix& weights) {
  const int n = static_cast<int>(weights.rows());
  if (weights.cols() != n) throw DataError("adjacency matrix must be square");
  if ((weights.array() < 0).any())
    throw DataError("adjacency weights must be nonnegative");
  Matrix with_loops = weights + Matrix::Identity(n, n);
  Vector degree = with_loops.rowwise().sum();
  Vector inv_sqrt = degree.array().inverse().sqrt();
  NormalizedAdjacency out;
  out.a_hat = inv_sqrt.asDiagonal() * with_loops * inv_sqrt.asDiagonal();
  out.fingerprint = adjacency_fingerprint(weights);
  return out;
}

NormalizedAdjacency normalize_adjacency(const CausalAdjacency& adj) {
  validate_adjacency(adj);
  return normalize_adjacency(adj.weights);
}

void ModelShape::validate() const {
  if (n_nodes < 1) throw ConfigError("model needs at least one node");
  if (history_len < 1 || horizon < 1)
    throw ConfigError("history_len and horizon must be >= 1");
  if (kernel_width < 1)
    throw ConfigError("kernel_width must be >= 1");
  if (kernel_width > history_len)
    throw ConfigError("kernel_width " + std::to_string(kernel_width) +
                      " exceeds history_len " + std::to_string(history_len));
  if (channels < 1 || hidden < 1 || hidden_out < 1)
    throw ConfigError("channel and hidden sizes must be >= 1");
}

std::size_t CtgcnModel::parameter_count() const {
  return static_cast<std::size_t>(conv_kernel.size()) + conv_bias.size() +
         w0.size() + w1.size() + head_w.size() + head_b.size();
}

CtgcnModel init_model(const ModelShape& shape, std::uint64_t seed) {
  shape.validate();
  Rng rng(seed);
  auto glorot = [&rng](Matrix& m, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        m(r, c) = rng.uniform(-limit, limit);
  };
  CtgcnModel model;
  model.shape = shape;
  model.conv_kernel.resize(shape.channels, shape.kernel_width);
  glorot(model.conv_kernel, shape.kernel_width, shape.channels);
  model.conv_bias = Vector::Zero(shape.channels);
  model.w0.resize(shape.channels, shape.hidden);
  glorot(model.w0, shape.channels, shape.hidden);
  model.w1.resize(shape.hidden, shape.hidden_out);
  glorot(model.w1, shape.hidden, shape.hidden_out);
  model.head_w.resize(shape.hidden_out, shape.horizon);
  glorot(model.head_w, shape.hidden_out, shape.horizon);
  model.head_b = Vector::Zero(shape.horizon);
  return model;
}

Matrix ctgcn_forward(const CtgcnModel& model, const NormalizedAdjacency& adj,
                     Eigen::Ref<const Matrix> window) {
  check_window_shape(model, adj, window);
  return run_forward(model, adj, window).y;
}

LossGrads loss_and_grads(const CtgcnModel& model, const NormalizedAdjacency& adj,
                         const TimeSeriesDataset& ds,
                         std::span<const Window> windows,
                         const WindowSpec& spec) {
  if (windows.empty()) throw InsufficientDataError("gradient batch is empty");

  std::vector<ForwardPass> passes;
  passes.reserve(windows.size());
  double sse = 0.0;
  for (const Window& w : windows) {
    Eigen::Ref<const Matrix> input = window_input(ds, w, spec);
    check_window_shape(model, adj, input);
    passes.push_back(run_forward(model, adj, input));
    sse += (passes.back().y - window_target(ds, w, spec)).squaredNorm();
  }
  const double denom = static_cast<double>(windows.size()) *
                       model.shape.n_nodes * model.shape.horizon;
  const double loss = std::sqrt(sse / denom + kLossEpsilon);

  LossGrads out;
  out.loss = loss;
  out.grads = zero_gradients(model);
  const Matrix a_hat_t = adj.a_hat.transpose();
  for (std::size_t i = 0; i < passes.size(); ++i) {
    const ForwardPass& f = passes[i];
    const Matrix dy =
        (f.y - window_target(ds, windows[i], spec)) / (denom * loss);
    out.grads.head_w.noalias() += f.h.transpose() * dy;
    out.grads.head_b += dy.colwise().sum().transpose();
    const Matrix dh = dy * model.head_w.transpose();
    out.grads.w1.noalias() += f.g1.transpose() * dh;
    const Matrix dg1 = dh * model.w1.transpose();
    const Matrix dr = a_hat_t * dg1;
    const Matrix dp0 = (f.p0.array() > 0.0).select(dr, Matrix::Zero(dr.rows(), dr.cols()));
    out.grads.w0.noalias() += f.g0.transpose() * dp0;
    const Matrix dg0 = dp0 * model.w0.transpose();
    const Matrix dxp = a_hat_t * dg0;
    out.grads.conv_kernel.noalias() += dxp.transpose() * f.m;
    out.grads.conv_bias += dxp.colwise().sum().transpose();
  }
  return out;
}

double batch_rmse(const CtgcnModel& model, const NormalizedAdjacency& adj,
                  const TimeSeriesDataset& ds, std::span<const Window> windows,
                  const WindowSpec& spec) {
  if (windows.empty()) throw InsufficientDataError("rmse over empty window set");
  double sse = 0.0;
  for (const Window& w : windows) {
    const Matrix y = ctgcn_forward(model, adj, window_input(ds, w, spec));
    sse += (y - window_target(ds, w, spec)).squaredNorm();
  }
  const double denom = static_cast<double>(windows.size()) *
                       model.shape.n_nodes * model.shape.horizon;
  return std::sqrt(sse / denom + kLossEpsilon);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (momentum < 0 || momentum >= 1)
    throw ConfigError("momentum must lie in [0, 1)");
  if (!(train_frac > 0) || !(val_frac > 0) || train_frac + val_frac >= 1.0)
    throw ConfigError("split fractions must be positive with train + val < 1");
}

SplitWindows split_windows_chronological(const std::vector<Window>& windows,
                                         const TrainConfig& cfg) {
  cfg.validate();
  const int total = static_cast<int>(windows.size());
  const int n_train = static_cast<int>(std::floor(cfg.train_frac * total));
  const int n_val = static_cast<int>(std::floor(cfg.val_frac * total));
  const int n_test = total - n_train - n_val;
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw InsufficientDataError(
        "chronological split of " + std::to_string(total) +
        " windows leaves an empty partition (train " + std::to_string(n_train) +
        ", val " + std::to_string(n_val) + ", test " + std::to_string(n_test) +
        ")");
  SplitWindows out;
  out.train.assign(windows.begin(), windows.begin() + n_train);
  out.val.assign(windows.begin() + n_train, windows.begin() + n_train + n_val);
  out.test.assign(windows.begin() + n_train + n_val, windows.end());
  return out;
}

TrainResult train_model(const CtgcnModel& init, const NormalizedAdjacency& adj,
                        const TimeSeriesDataset& ds, const WindowSpec& spec,
                        const TrainConfig& cfg) {
  cfg.validate();
  init.shape.validate();
  const auto windows = make_windows(ds, spec);
  const SplitWindows splits = split_windows_chronological(windows, cfg);

  TrainResult result;
  result.model = init;
  CtgcnModel current = init;
  Gradients velocity = zero_gradients(current);
  result.best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<int> order(splits.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, "epoch-" + std::to_string(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.below(i);
      std::swap(order[i - 1], order[j]);
    }

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Window> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(splits.train[order[i]]);
      const LossGrads lg = loss_and_grads(current, adj, ds, batch, spec);

      auto step = [&](Matrix& param, Matrix& vel, const Matrix& grad) {
        vel = cfg.momentum * vel - cfg.learning_rate * grad;
        param += vel;
      };
      auto step_v = [&](Vector& param, Vector& vel, const Vector& grad) {
        vel = cfg.momentum * vel - cfg.learning_rate * grad;
        param += vel;
      };
      step(current.conv_kernel, velocity.conv_kernel, lg.grads.conv_kernel);
      step_v(current.conv_bias, velocity.conv_bias, lg.grads.conv_bias);
      step(current.w0, velocity.w0, lg.grads.w0);
      step(current.w1, velocity.w1, lg.grads.w1);
      step(current.head_w, velocity.head_w, lg.grads.head_w);
      step_v(current.head_b, velocity.head_b, lg.grads.head_b);
    }

    EpochStats stats;
    if (model_finite(current)) {
      stats.train_loss = batch_rmse(current, adj, ds, splits.train, spec);
      stats.val_loss = batch_rmse(current, adj, ds, splits.val, spec);
    } else {
      stats.train_loss = std::numeric_limits<double>::infinity();
      stats.val_loss = std::numeric_limits<double>::infinity();
    }
    result.trace.push_back(stats);

    if (std::isfinite(stats.val_loss) && stats.val_loss < result.best_val_loss) {
      result.best_val_loss = stats.val_loss;
      result.best_epoch = epoch;
      result.model = current;
    }
    if (!model_finite(current)) break;  // diverged; later epochs cannot recover
  }

  if (result.best_epoch < 0)
    throw StageError("training diverged before completing one usable epoch");
  result.test_loss = batch_rmse(result.model, adj, ds, splits.test, spec);
  return result;
}

TuneOutcome tune_model(const TuneSpace& space, const ModelShape& base_shape,
                       const TrainConfig& base_cfg,
                       const NormalizedAdjacency& adj,
                       const TimeSeriesDataset& ds, const WindowSpec& spec) {
  if (space.learning_rates.empty() && space.batch_sizes.empty() &&
      space.channels.empty() && space.hidden.empty() &&
      space.hidden_out.empty() && space.kernel_widths.empty())
    throw ConfigError("tuning space is empty");
  // Dimensions left unset fall back to the base configuration.
  auto or_default = [](const std::vector<int>& v, int fallback) {
    return v.empty() ? std::vector<int>{fallback} : v;
  };
  const std::vector<double> lrs = space.learning_rates.empty()
                                      ? std::vector<double>{base_cfg.learning_rate}
                                      : space.learning_rates;
  const auto batches = or_default(space.batch_sizes, base_cfg.batch_size);
  const auto channels = or_default(space.channels, base_shape.channels);
  const auto hiddens = or_default(space.hidden, base_shape.hidden);
  const auto hidden_outs = or_default(space.hidden_out, base_shape.hidden_out);
  const auto kernels = or_default(space.kernel_widths, base_shape.kernel_width);

  TuneOutcome outcome;
  outcome.best_val_loss = std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (double lr : lrs) {
    for (int bs : batches) {
      for (int ch : channels) {
        for (int h : hiddens) {
          for (int ho : hidden_outs) {
            for (int kw : kernels) {
              TuneCandidate cand;
              cand.shape = base_shape;
              cand.shape.channels = ch;
              cand.shape.hidden = h;
              cand.shape.hidden_out = ho;
              cand.shape.kernel_width = kw;
              cand.config = base_cfg;
              cand.config.learning_rate = lr;
              cand.config.batch_size = bs;

              double val = std::numeric_limits<double>::infinity();
              try {
                const CtgcnModel model =
                    init_model(cand.shape, derive_seed(cand.config.seed, "init"));
                const TrainResult tr =
                    train_model(model, adj, ds, spec, cand.config);
                val = tr.best_val_loss;
              } catch (const StageError&) {
                // divergence counts as an infinitely bad candidate
              }
              outcome.all.emplace_back(cand, val);
              if (!have_best || val < outcome.best_val_loss) {
                outcome.best = cand;
                outcome.best_val_loss = val;
                have_best = true;
              }
            }
          }
        }
      }
    }
  }
  if (!have_best || !std::isfinite(outcome.best_val_loss))
    throw StageError("no tuning candidate trained to a finite validation loss");
  return outcome;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  ckpt.model.shape.validate();
  nlohmann::json j;
  j["format"] = "ctgcn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["shape"] = {{"n_nodes", ckpt.model.shape.n_nodes},
                {"history_len", ckpt.model.shape.history_len},
                {"horizon", ckpt.model.shape.horizon},
                {"kernel_width", ckpt.model.shape.kernel_width},
                {"channels", ckpt.model.shape.channels},
                {"hidden", ckpt.model.shape.hidden},
                {"hidden_out", ckpt.model.shape.hidden_out}};
  j["params"] = {{"conv_kernel", matrix_to_json(ckpt.model.conv_kernel)},
                 {"conv_bias", vector_to_json(ckpt.model.conv_bias)},
                 {"w0", matrix_to_json(ckpt.model.w0)},
                 {"w1", matrix_to_json(ckpt.model.w1)},
                 {"head_w", matrix_to_json(ckpt.model.head_w)},
                 {"head_b", vector_to_json(ckpt.model.head_b)}};
  j["normalization"] = {{"mean", vector_to_json(ckpt.stats.mean)},
                        {"std", vector_to_json(ckpt.stats.stddev)}};
  j["window"] = {{"history_len", ckpt.window_spec.history_len},
                 {"horizon", ckpt.window_spec.horizon},
                 {"stride", ckpt.window_spec.stride}};
  j["adjacency_fingerprint"] = ckpt.adjacency_fingerprint;

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path,
                           std::uint64_t expected_fingerprint) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }

  try {
    if (j.value("format", "") != "ctgcn-checkpoint")
      throw DataError(path + ": not a checkpoint file");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw DataError(path + ": unsupported checkpoint version " +
                      j["version"].dump());

    Checkpoint ckpt;
    const auto& s = j.at("shape");
    ckpt.model.shape = {s.at("n_nodes").get<int>(),
                        s.at("history_len").get<int>(),
                        s.at("horizon").get<int>(),
                        s.at("kernel_width").get<int>(),
                        s.at("channels").get<int>(),
                        s.at("hidden").get<int>(),
                        s.at("hidden_out").get<int>()};
    ckpt.model.shape.validate();

    const auto& p = j.at("params");
    ckpt.model.conv_kernel = matrix_from_json(p.at("conv_kernel"));
    ckpt.model.conv_bias = vector_from_json(p.at("conv_bias"));
    ckpt.model.w0 = matrix_from_json(p.at("w0"));
    ckpt.model.w1 = matrix_from_json(p.at("w1"));
    ckpt.model.head_w = matrix_from_json(p.at("head_w"));
    ckpt.model.head_b = vector_from_json(p.at("head_b"));

    const ModelShape& shape = ckpt.model.shape;
    const bool shapes_ok =
        ckpt.model.conv_kernel.rows() == shape.channels &&
        ckpt.model.conv_kernel.cols() == shape.kernel_width &&
        ckpt.model.conv_bias.size() == shape.channels &&
        ckpt.model.w0.rows() == shape.channels &&
        ckpt.model.w0.cols() == shape.hidden &&
        ckpt.model.w1.rows() == shape.hidden &&
        ckpt.model.w1.cols() == shape.hidden_out &&
        ckpt.model.head_w.rows() == shape.hidden_out &&
        ckpt.model.head_w.cols() == shape.horizon &&
        ckpt.model.head_b.size() == shape.horizon;
    if (!shapes_ok)
      throw DataError(path + ": parameter shapes disagree with declared shape");

    const auto& norm = j.at("normalization");
    ckpt.stats.mean = vector_from_json(norm.at("mean"));
    ckpt.stats.stddev = vector_from_json(norm.at("std"));
    if (ckpt.stats.mean.size() != ckpt.stats.stddev.size() ||
        ckpt.stats.mean.size() != shape.n_nodes)
      throw DataError(path + ": normalization stats disagree with node count");

    const auto& w = j.at("window");
    ckpt.window_spec = {w.at("history_len").get<int>(),
                        w.at("horizon").get<int>(), w.at("stride").get<int>()};
    if (ckpt.window_spec.history_len != shape.history_len ||
        ckpt.window_spec.horizon != shape.horizon)
      throw DataError(path + ": window spec disagrees with model shape");

    ckpt.adjacency_fingerprint =
        j.at("adjacency_fingerprint").get<std::uint64_t>();
    if (expected_fingerprint != 0 &&
        ckpt.adjacency_fingerprint != expected_fingerprint)
      throw DataError(path +
                      ": adjacency fingerprint does not match the graph this "
                      "model was trained against");
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace ctgcn
