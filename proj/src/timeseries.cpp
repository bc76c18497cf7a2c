#include "ctgcn/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace ctgcn {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Days since 1970-01-01 for a proleptic Gregorian date.
long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

bool parse_uint_field(const std::string& s, std::size_t pos, std::size_t len,
                      int* out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  *out = v;
  return true;
}

// Accepts YYYY-MM-DD optionally followed by 'T' or ' ' and HH:MM[:SS[.frac]].
std::optional<double> parse_iso8601(const std::string& s) {
  int y, mo, d;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!parse_uint_field(s, 0, 4, &y) || !parse_uint_field(s, 5, 2, &mo) ||
      !parse_uint_field(s, 8, 2, &d))
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  double secs = static_cast<double>(days_from_civil(y, mo, d)) * 86400.0;
  if (s.size() == 10) return secs;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  int hh, mi;
  if (s.size() < 16 || s[13] != ':') return std::nullopt;
  if (!parse_uint_field(s, 11, 2, &hh) || !parse_uint_field(s, 14, 2, &mi))
    return std::nullopt;
  if (hh > 23 || mi > 59) return std::nullopt;
  secs += hh * 3600.0 + mi * 60.0;
  if (s.size() == 16) return secs;
  if (s[16] != ':') return std::nullopt;
  int ss;
  if (!parse_uint_field(s, 17, 2, &ss) || ss > 60) return std::nullopt;
  secs += ss;
  if (s.size() == 19) return secs;
  if (s[19] != '.') return std::nullopt;
  double frac = 0.0, scale = 0.1;
  for (std::size_t i = 20; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    frac += (s[i] - '0') * scale;
    scale *= 0.1;
  }
  if (s.size() == 20) return std::nullopt;
  return secs + frac;
}

std::optional<double> parse_timestamp(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() + s.size() && std::isfinite(v)) return v;
  return parse_iso8601(s);
}

std::optional<double> parse_value(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void cell_error(const std::string& path, const std::string& what,
                             int row, int col) {
  std::ostringstream os;
  os << path << ": " << what << " at data row " << row << ", column " << col;
  throw DataError(os.str());
}

}  // namespace

int TimeSeriesDataset::feature_index(const std::string& name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

// Shape, names, and value checks shared by analysis inputs (which also need
// two samples) and serialization (which accepts a single column).
void validate_structure(const TimeSeriesDataset& ds) {
  if (ds.values.rows() == 0) throw DataError("dataset has no features");
  if (static_cast<int>(ds.feature_names.size()) != ds.n_features())
    throw DataError("feature name count does not match row count");
  std::set<std::string> seen;
  for (const auto& name : ds.feature_names) {
    if (name.empty()) throw DataError("empty feature name");
    if (!seen.insert(name).second)
      throw DataError("duplicate feature name: " + name);
  }
  if (!ds.values.allFinite()) throw DataError("dataset contains non-finite values");
  if (!(ds.sample_interval > 0))
    throw DataError("sample interval must be positive");
}

}  // namespace

void validate_dataset(const TimeSeriesDataset& ds) {
  validate_structure(ds);
  if (ds.values.cols() < 2)
    throw InsufficientDataError("dataset needs at least 2 samples, has " +
                                std::to_string(ds.values.cols()));
}

TimeSeriesDataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DataError(path + ": empty file");

  const auto header = split_line(lines[0], opts.delimiter);
  const int first_value_col = opts.timestamp_column ? 1 : 0;
  const int n_features = static_cast<int>(header.size()) - first_value_col;
  if (n_features < 1) throw DataError(path + ": header has no feature columns");

  TimeSeriesDataset ds;
  for (int j = 0; j < n_features; ++j) {
    ds.feature_names.push_back(trim(header[first_value_col + j]));
  }

  const int n_rows = static_cast<int>(lines.size()) - 1;
  if (n_rows < 2)
    throw InsufficientDataError(path + ": needs at least 2 data rows, has " +
                                std::to_string(n_rows));

  ds.values.resize(n_features, n_rows);
  std::vector<double> timestamps;
  timestamps.reserve(n_rows);

  for (int r = 0; r < n_rows; ++r) {
    const int data_row = r + 1;
    const auto cells = split_line(lines[r + 1], opts.delimiter);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << path << ": data row " << data_row << " has " << cells.size()
         << " columns, expected " << header.size();
      throw DataError(os.str());
    }
    if (opts.timestamp_column) {
      const auto t = parse_timestamp(cells[0]);
      if (!t) cell_error(path, "unparseable timestamp '" + trim(cells[0]) + "'",
                         data_row, 1);
      if (!timestamps.empty() && !(*t > timestamps.back()))
        cell_error(path, "timestamps not strictly increasing", data_row, 1);
      timestamps.push_back(*t);
    }
    for (int j = 0; j < n_features; ++j) {
      const int file_col = first_value_col + j + 1;
      const std::string cell = trim(cells[first_value_col + j]);
      if (cell.empty())
        cell_error(path, "missing value", data_row, file_col);
      const auto v = parse_value(cell);
      if (!v) cell_error(path, "unparseable value '" + cell + "'", data_row,
                         file_col);
      ds.values(j, r) = *v;
    }
  }

  if (timestamps.size() >= 2) {
    std::vector<double> deltas(timestamps.size() - 1);
    for (std::size_t i = 0; i + 1 < timestamps.size(); ++i)
      deltas[i] = timestamps[i + 1] - timestamps[i];
    std::sort(deltas.begin(), deltas.end());
    ds.sample_interval = deltas[deltas.size() / 2];
  }

  validate_dataset(ds);
  return ds;
}

void write_csv(const TimeSeriesDataset& ds, const std::string& path,
               const CsvOptions& opts) {
  validate_structure(ds);
  if (ds.values.cols() < 1)
    throw InsufficientDataError("dataset has no samples to write");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);

  char buf[64];
  if (opts.timestamp_column) out << "t" << opts.delimiter;
  for (int j = 0; j < ds.n_features(); ++j) {
    if (j) out << opts.delimiter;
    out << ds.feature_names[j];
  }
  out << "\n";
  for (int c = 0; c < ds.n_samples(); ++c) {
    if (opts.timestamp_column) {
      std::snprintf(buf, sizeof buf, "%.17g", c * ds.sample_interval);
      out << buf << opts.delimiter;
    }
    for (int j = 0; j < ds.n_features(); ++j) {
      if (j) out << opts.delimiter;
      std::snprintf(buf, sizeof buf, "%.17g", ds.values(j, c));
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw DataError("write failed for " + path);
}

std::pair<TimeSeriesDataset, NormalizationStats> zscore_normalize(
    const TimeSeriesDataset& ds) {
  validate_dataset(ds);
  const int n = ds.n_features();
  const int p = ds.n_samples();
  NormalizationStats stats;
  stats.mean.resize(n);
  stats.stddev.resize(n);
  TimeSeriesDataset out = ds;
  for (int i = 0; i < n; ++i) {
    const double mean = ds.values.row(i).mean();
    const double var =
        (ds.values.row(i).array() - mean).square().sum() / (p - 1);
    const double sd = std::sqrt(var);
    stats.mean[i] = mean;
    stats.stddev[i] = sd;
    out.values.row(i) =
        (ds.values.row(i).array() - mean) / stats.applied_std(i);
  }
  return {std::move(out), std::move(stats)};
}

TimeSeriesDataset denormalize(const TimeSeriesDataset& ds,
                              const NormalizationStats& stats) {
  if (stats.mean.size() != ds.n_features())
    throw DataError("normalization stats cover " +
                    std::to_string(stats.mean.size()) + " features, dataset has " +
                    std::to_string(ds.n_features()));
  TimeSeriesDataset out = ds;
  out.values = denormalize_block(ds.values, stats);
  return out;
}

Matrix denormalize_block(const Matrix& block, const NormalizationStats& stats) {
  if (stats.mean.size() != block.rows())
    throw DataError("normalization stats cover " +
                    std::to_string(stats.mean.size()) + " features, block has " +
                    std::to_string(block.rows()) + " rows");
  Matrix out = block;
  for (int i = 0; i < block.rows(); ++i) {
    out.row(i) = block.row(i) * stats.applied_std(i) + Eigen::RowVectorXd::Constant(block.cols(), stats.mean[i]);
  }
  return out;
}

std::vector<Window> make_windows(const TimeSeriesDataset& ds,
                                 const WindowSpec& spec) {
  if (spec.history_len < 1 || spec.horizon < 1 || spec.stride < 1)
    throw ConfigError("window spec fields must be positive");
  const int p = ds.n_samples();
  const int span = spec.history_len + spec.horizon;
  if (span > p)
    throw InsufficientDataError(
        "window needs " + std::to_string(span) + " samples, series has " +
        std::to_string(p));
  const int count = (p - span) / spec.stride + 1;
  std::vector<Window> windows(count);
  for (int i = 0; i < count; ++i) {
    windows[i].input_begin = i * spec.stride;
    windows[i].target_begin = i * spec.stride + spec.history_len;
  }
  return windows;
}

PeriodSplit split_periods(const TimeSeriesDataset& ds, int period_len) {
  if (period_len <= 0)
    throw ConfigError("period length must be positive, got " +
                      std::to_string(period_len));
  const int p = ds.n_samples();
  if (period_len > p)
    throw InsufficientDataError("period length " + std::to_string(period_len) +
                                " exceeds series length " + std::to_string(p));
  PeriodSplit out;
  const int n_periods = p / period_len;
  out.dropped_samples = p - n_periods * period_len;
  out.periods.reserve(n_periods);
  for (int k = 0; k < n_periods; ++k) {
    TimeSeriesDataset period;
    period.feature_names = ds.feature_names;
    period.sample_interval = ds.sample_interval;
    period.values = ds.values.middleCols(k * period_len, period_len);
    out.periods.push_back(std::move(period));
  }
  return out;
}

TimeSeriesDataset mean_downsample(const TimeSeriesDataset& ds, int factor) {
  if (factor < 1) throw ConfigError("downsample factor must be >= 1");
  if (factor == 1) return ds;
  const int p = ds.n_samples() / factor;
  if (p < 2)
    throw InsufficientDataError("downsampling by " + std::to_string(factor) +
                                " leaves fewer than 2 samples");
  TimeSeriesDataset out;
  out.feature_names = ds.feature_names;
  out.sample_interval = ds.sample_interval * factor;
  out.values.resize(ds.n_features(), p);
  for (int c = 0; c < p; ++c) {
    out.values.col(c) = ds.values.middleCols(c * factor, factor).rowwise().mean();
  }
  return out;
}

}  // namespace ctgcn
