#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "ctgcn/errors.hpp"

namespace ctgcn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A multivariate series: one row per feature, one column per time step.
// Feature names are unique and columns are equally spaced sample_interval
// apart (seconds, or abstract steps for unit-less data).
struct TimeSeriesDataset {
  std::vector<std::string> feature_names;
  Matrix values;
  double sample_interval = 1.0;

  int n_features() const { return static_cast<int>(values.rows()); }
  int n_samples() const { return static_cast<int>(values.cols()); }
  int feature_index(const std::string& name) const;
};

// Throws DataError unless names match rows, names are unique and non-empty,
// there are at least two samples, and every value is finite.
void validate_dataset(const TimeSeriesDataset& ds);

struct CsvOptions {
  char delimiter = ',';
  bool timestamp_column = true;
};

// Loads a headered CSV whose first column is a timestamp (integer, decimal,
// or ISO-8601) when opts.timestamp_column is set. Timestamps must be strictly
// increasing; any unparseable or missing cell is a hard error naming the
// 1-based row and column.
TimeSeriesDataset load_csv(const std::string& path, const CsvOptions& opts = {});

// Inverse of load_csv up to timestamp origin: emits a "t" column with
// timestamps k * sample_interval and values with 17 significant digits so a
// round trip reproduces the dataset bit for bit.
void write_csv(const TimeSeriesDataset& ds, const std::string& path,
               const CsvOptions& opts = {});

// Per-feature mean and sample standard deviation (P-1 denominator). The
// stored std is the raw value; the clamp below is applied only when dividing.
struct NormalizationStats {
  Vector mean;
  Vector stddev;

  static constexpr double kStdFloor = 1e-12;
  double applied_std(int i) const {
    return stddev[i] < kStdFloor ? kStdFloor : stddev[i];
  }
};

std::pair<TimeSeriesDataset, NormalizationStats> zscore_normalize(
    const TimeSeriesDataset& ds);

TimeSeriesDataset denormalize(const TimeSeriesDataset& ds,
                              const NormalizationStats& stats);

// Maps a block of normalized values (rows = features) back to original scale.
Matrix denormalize_block(const Matrix& block, const NormalizationStats& stats);

struct WindowSpec {
  int history_len = 8;
  int horizon = 1;
  int stride = 1;
};

// A window is a pair of column offsets into the source dataset; the input
// block is values.middleCols(input_begin, history_len) and the target block
// values.middleCols(target_begin, horizon). No data is copied.
struct Window {
  int input_begin = 0;
  int target_begin = 0;
};

// Chronological sliding windows. Count is floor((P - history - horizon) /
// stride) + 1; a series too short for a single window is an error.
std::vector<Window> make_windows(const TimeSeriesDataset& ds,
                                 const WindowSpec& spec);

inline Eigen::Ref<const Matrix> window_input(const TimeSeriesDataset& ds,
                                             const Window& w,
                                             const WindowSpec& spec) {
  return ds.values.middleCols(w.input_begin, spec.history_len);
}

inline Eigen::Ref<const Matrix> window_target(const TimeSeriesDataset& ds,
                                              const Window& w,
                                              const WindowSpec& spec) {
  return ds.values.middleCols(w.target_begin, spec.horizon);
}

struct PeriodSplit {
  std::vector<TimeSeriesDataset> periods;
  int dropped_samples = 0;
};

// Splits into floor(P / period_len) consecutive periods; the trailing
// remainder is dropped and reported in the result.
PeriodSplit split_periods(const TimeSeriesDataset& ds, int period_len);

// Block means over `factor` consecutive samples; the trailing partial block
// is dropped and sample_interval scales by factor.
TimeSeriesDataset mean_downsample(const TimeSeriesDataset& ds, int factor);

}  // namespace ctgcn
