#pragma once

// Dataset characterization over raw multivariate series: normalized Shannon
// and spectral entropies, sample entropy, the ADF unit-root coefficient,
// Higuchi fractal dimension, first-principal-component explained variance,
// plus the last-observation-carried-forward baseline and raw error metrics.

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "benchaudit/core.hpp"
#include "benchaudit/errors.hpp"

namespace benchaudit {

struct SeriesMatrix {
  std::string name;
  std::vector<std::vector<double>> channels; // [channel][timestep]
  std::vector<std::string> channel_names;    // may be empty for synthetic data
  std::optional<std::string> frequency;
  std::size_t filled_cells = 0; // forward-filled during ingestion

  std::size_t timesteps() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  std::size_t channel_count() const { return channels.size(); }
};

namespace detail {

inline void require_length(const std::vector<double> &xs, std::size_t need,
                           const char *op) {
  if (xs.size() < need)
    throw ValidationError(ValidationKind::TooShort,
                          std::string(op) + " needs at least " +
                              std::to_string(need) + " samples, got " +
                              std::to_string(xs.size()));
}

inline double mean_of(const std::vector<double> &xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

// Population standard deviation.
inline double std_of(const std::vector<double> &xs, double mean) {
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

// In-place iterative radix-2 Cooley-Tukey transform; n must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>> &a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::acos(-1.0) / static_cast<double>(len);
    const std::complex<double> step(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
}

} // namespace detail

// Histogram entropy over [min, max] with equal-width bins, divided by
// log(bins) so the result lands in [0, 1]. A constant series is 0 by the
// single-occupied-bin convention.
inline double shannon_entropy(const std::vector<double> &xs,
                              std::size_t bins = 64) {
  if (bins < 2)
    throw ValidationError(ValidationKind::BadArgument, "need at least 2 bins");
  detail::require_length(xs, 2, "shannon_entropy");
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) return 0.0;
  std::vector<std::size_t> counts(bins, 0);
  for (double x : xs) {
    auto idx = static_cast<std::size_t>((x - lo) / (hi - lo) *
                                        static_cast<double>(bins));
    ++counts[std::min(idx, bins - 1)]; // the maximum falls into the top bin
  }
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(xs.size());
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(bins));
}

// Entropy of the normalized periodogram over positive frequencies, divided by
// log of the frequency-bin count. The transform runs on the longest
// power-of-two prefix (documented estimator choice), mean removed first.
inline double spectral_entropy(const std::vector<double> &xs) {
  detail::require_length(xs, 8, "spectral_entropy");
  const std::size_t n = std::bit_floor(xs.size());
  std::vector<double> prefix(xs.begin(), xs.begin() + static_cast<long>(n));
  const double mean = detail::mean_of(prefix);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = prefix[i] - mean;
  detail::fft_pow2(buf);
  // Positive frequencies 1..n/2 (DC removed with the mean, Nyquist included).
  std::vector<double> power(n / 2);
  double total = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    power[k - 1] = std::norm(buf[k]);
    total += power[k - 1];
  }
  if (total == 0.0) return 0.0; // constant prefix
  double h = 0.0;
  for (double p : power) {
    if (p == 0.0) continue;
    const double q = p / total;
    h -= q * std::log(q);
  }
  return h / std::log(static_cast<double>(n / 2));
}

struct SampleEntropy {
  double value = 0.0;
  bool no_matches = false; // no template pair matched at length m
};

namespace detail {

// Richman-Moorman counting: template starts i in [0, N-m-1] so every length-m
// template owns a length-(m+1) extension; A-matches are a subset of B-matches
// and the estimate is never negative. Counts are over unordered pairs.
inline SampleEntropy sampen_chunk(const std::vector<double> &z, std::size_t m,
                                  double r) {
  const std::size_t n = z.size();
  const std::size_t templates = n - m; // starts 0..n-m-1
  unsigned long long a = 0, b = 0;
  for (std::size_t i = 0; i + 1 < templates; ++i)
    for (std::size_t j = i + 1; j < templates; ++j) {
      double dist = 0.0;
      for (std::size_t t = 0; t < m; ++t)
        dist = std::max(dist, std::abs(z[i + t] - z[j + t]));
      if (dist > r) continue;
      ++b;
      if (std::abs(z[i + m] - z[j + m]) <= r) ++a;
    }
  SampleEntropy out;
  if (b == 0) {
    out.value = std::numeric_limits<double>::infinity();
    out.no_matches = true;
    return out;
  }
  if (a == 0) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = -std::log(static_cast<double>(a) / static_cast<double>(b));
  return out;
}

} // namespace detail

// -ln(A/B) with Chebyshev tolerance r on the z-normalized series. Series
// longer than 5000 samples are estimated on full contiguous 5000-sample
// chunks and averaged (the tail shorter than a chunk is dropped).
inline SampleEntropy sample_entropy(const std::vector<double> &xs,
                                    std::size_t m = 2, double r = 0.2) {
  if (m == 0)
    throw ValidationError(ValidationKind::BadArgument, "embedding m must be >= 1");
  if (!(r > 0.0))
    throw ValidationError(ValidationKind::BadArgument, "tolerance r must be > 0");
  detail::require_length(xs, m + 2, "sample_entropy");
  const double mean = detail::mean_of(xs);
  const double sd = detail::std_of(xs, mean);
  if (sd == 0.0) return {0.0, false}; // constant: perfectly regular
  std::vector<double> z(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) z[i] = (xs[i] - mean) / sd;

  constexpr std::size_t kChunk = 5000;
  if (z.size() <= kChunk) return detail::sampen_chunk(z, m, r);

  double sum = 0.0;
  std::size_t chunks = 0;
  bool no_matches = false;
  for (std::size_t start = 0; start + kChunk <= z.size(); start += kChunk) {
    std::vector<double> piece(z.begin() + static_cast<long>(start),
                              z.begin() + static_cast<long>(start + kChunk));
    const auto est = detail::sampen_chunk(piece, m, r);
    sum += est.value;
    no_matches |= est.no_matches;
    ++chunks;
  }
  return {sum / static_cast<double>(chunks), no_matches};
}

namespace detail {

// Householder QR least squares; returns the coefficient vector. Throws
// SingularDesign when a diagonal of R collapses relative to the column scale.
inline std::vector<double> qr_solve(std::vector<std::vector<double>> x,
                                    std::vector<double> y) {
  const std::size_t rows = x.size();
  const std::size_t cols = rows == 0 ? 0 : x.front().size();
  if (rows < cols)
    throw NumericalError(NumericalKind::SingularDesign,
                         "fewer observations than regressors");
  double scale = 0.0;
  for (const auto &row : x)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0)
    throw NumericalError(NumericalKind::SingularDesign, "all-zero design");

  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < rows; ++i) norm += x[i][k] * x[i][k];
    norm = std::sqrt(norm);
    if (norm < 1e-12 * scale)
      throw NumericalError(NumericalKind::SingularDesign,
                           "design column " + std::to_string(k) +
                               " is numerically dependent");
    if (x[k][k] < 0) norm = -norm; // keep the reflector head away from zero
    for (std::size_t i = k; i < rows; ++i) x[i][k] /= norm;
    x[k][k] += 1.0;
    for (std::size_t j = k + 1; j < cols; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < rows; ++i) dot += x[i][k] * x[i][j];
      dot = -dot / x[k][k];
      for (std::size_t i = k; i < rows; ++i) x[i][j] += dot * x[i][k];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < rows; ++i) dot += x[i][k] * y[i];
    dot = -dot / x[k][k];
    for (std::size_t i = k; i < rows; ++i) y[i] += dot * x[i][k];
    x[k][k] = -norm; // diagonal entry of R replaces the reflector head
  }

  std::vector<double> beta(cols, 0.0);
  for (std::size_t k = cols; k-- > 0;) {
    double acc = y[k];
    for (std::size_t j = k + 1; j < cols; ++j) acc -= x[k][j] * beta[j];
    beta[k] = acc / x[k][k];
  }
  return beta;
}

} // namespace detail

// Schwert's deterministic lag rule, floor(12 * (T/100)^(1/4)).
inline std::size_t adf_default_lags(std::size_t t) {
  return static_cast<std::size_t>(
      12.0 * std::pow(static_cast<double>(t) / 100.0, 0.25));
}

// OLS coefficient of y_{t-1} in the augmented Dickey-Fuller regression
// dy_t ~ const + y_{t-1} + dy_{t-1..t-lags}; gamma < 0 suggests stationarity.
inline double adf_gamma(const std::vector<double> &xs,
                        std::optional<std::size_t> lags = std::nullopt) {
  const std::size_t chosen = lags.value_or(adf_default_lags(xs.size()));
  detail::require_length(xs, chosen + 10, "adf_gamma");
  const std::size_t t0 = chosen + 1; // first usable t for dy_t
  const std::size_t rows = xs.size() - t0;
  const std::size_t cols = 2 + chosen;
  std::vector<std::vector<double>> design(rows, std::vector<double>(cols));
  std::vector<double> target(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t t = t0 + i;
    target[i] = xs[t] - xs[t - 1];
    design[i][0] = 1.0;
    design[i][1] = xs[t - 1];
    for (std::size_t l = 1; l <= chosen; ++l)
      design[i][1 + l] = xs[t - l] - xs[t - l - 1];
  }
  return detail::qr_solve(std::move(design), std::move(target))[1];
}

// Higuchi curve-length slope: L(k) averaged over offsets, dimension is the
// negative slope of log L(k) against log k for k = 1..k_max.
inline double higuchi_fd(const std::vector<double> &xs, std::size_t k_max = 10) {
  if (k_max < 2)
    throw ValidationError(ValidationKind::BadArgument, "k_max must be >= 2");
  detail::require_length(xs, 10 * k_max, "higuchi_fd");
  const std::size_t n = xs.size();
  std::vector<double> log_k, log_l;
  for (std::size_t k = 1; k <= k_max; ++k) {
    double sum = 0.0;
    for (std::size_t m0 = 0; m0 < k; ++m0) {
      const std::size_t steps = (n - 1 - m0) / k;
      if (steps == 0) continue;
      double length = 0.0;
      for (std::size_t i = 1; i <= steps; ++i)
        length += std::abs(xs[m0 + i * k] - xs[m0 + (i - 1) * k]);
      length *= static_cast<double>(n - 1) /
                (static_cast<double>(steps) * static_cast<double>(k) *
                 static_cast<double>(k));
      sum += length;
    }
    log_k.push_back(std::log(static_cast<double>(k)));
    log_l.push_back(std::log(sum / static_cast<double>(k)));
  }
  const double mk = detail::mean_of(log_k), ml = detail::mean_of(log_l);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < log_k.size(); ++i) {
    num += (log_k[i] - mk) * (log_l[i] - ml);
    den += (log_k[i] - mk) * (log_k[i] - mk);
  }
  return -num / den;
}

struct PcaResult {
  double ev1 = 1.0;
  std::vector<std::size_t> dropped_channels; // zero-variance, excluded
};

// Explained variance of the first principal component: largest eigenvalue of
// the channel correlation matrix over its trace, via cyclic Jacobi sweeps.
inline PcaResult pca_ev1(const SeriesMatrix &series) {
  if (series.channel_count() == 0 || series.timesteps() < 2)
    throw ValidationError(ValidationKind::DegenerateShape,
                          "need at least one channel and two timesteps");
  PcaResult result;
  std::vector<std::vector<double>> z;
  for (std::size_t c = 0; c < series.channel_count(); ++c) {
    const auto &chan = series.channels[c];
    const double mean = detail::mean_of(chan);
    const double sd = detail::std_of(chan, mean);
    if (sd == 0.0) {
      result.dropped_channels.push_back(c);
      continue;
    }
    std::vector<double> zc(chan.size());
    for (std::size_t i = 0; i < chan.size(); ++i) zc[i] = (chan[i] - mean) / sd;
    z.push_back(std::move(zc));
  }
  if (z.empty())
    throw NumericalError(NumericalKind::AllChannelsConstant,
                         "every channel has zero variance");
  const std::size_t c = z.size();
  if (c == 1) {
    result.ev1 = 1.0;
    return result;
  }
  const auto t = static_cast<double>(series.timesteps());
  std::vector<std::vector<double>> corr(c, std::vector<double>(c, 0.0));
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i; j < c; ++j) {
      double dot = 0.0;
      for (std::size_t s = 0; s < z[i].size(); ++s) dot += z[i][s] * z[j][s];
      corr[i][j] = corr[j][i] = dot / t;
    }

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = i + 1; j < c; ++j) off += corr[i][j] * corr[i][j];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < c; ++p)
      for (std::size_t q = p + 1; q < c; ++q) {
        if (corr[p][q] == 0.0) continue;
        const double theta =
            0.5 * std::atan2(2.0 * corr[p][q], corr[q][q] - corr[p][p]);
        const double s = std::sin(theta), co = std::cos(theta);
        for (std::size_t i = 0; i < c; ++i) {
          const double aip = corr[i][p], aiq = corr[i][q];
          corr[i][p] = co * aip - s * aiq;
          corr[i][q] = s * aip + co * aiq;
        }
        for (std::size_t i = 0; i < c; ++i) {
          const double api = corr[p][i], aqi = corr[q][i];
          corr[p][i] = co * api - s * aqi;
          corr[q][i] = s * api + co * aqi;
        }
      }
  }
  double largest = corr[0][0], trace = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    largest = std::max(largest, corr[i][i]);
    trace += corr[i][i];
  }
  result.ev1 = largest / trace;
  return result;
}

// Naive baseline: repeat the last observed value across the horizon.
inline std::vector<double> locf_forecast(const std::vector<double> &context,
                                         std::size_t horizon) {
  if (context.empty())
    throw ValidationError(ValidationKind::TooShort,
                          "locf needs a non-empty context");
  if (horizon == 0)
    throw ValidationError(ValidationKind::OutOfRange,
                          "horizon must be positive");
  return std::vector<double>(horizon, context.back());
}

struct ErrorMetrics {
  double mse = 0.0;
  double mae = 0.0;
};

inline ErrorMetrics error_metrics(const std::vector<double> &pred,
                                  const std::vector<double> &truth) {
  if (pred.size() != truth.size())
    throw ValidationError(ValidationKind::LengthMismatch,
                          "prediction and truth lengths differ");
  if (pred.empty())
    throw ValidationError(ValidationKind::TooShort,
                          "need at least one element");
  ErrorMetrics out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    out.mse += d * d;
    out.mae += std::abs(d);
  }
  out.mse /= static_cast<double>(pred.size());
  out.mae /= static_cast<double>(pred.size());
  return out;
}

// Whole-dataset report: scalar features are channel means; pca_ev1 is
// matrix-level. Per-channel vectors are filled only when requested.
struct FeatureOptions {
  std::size_t shannon_bins = 64;
  std::size_t sampen_m = 2;
  double sampen_r = 0.2;
  std::optional<std::size_t> adf_lags; // empty: Schwert default
  std::size_t higuchi_k_max = 10;
  bool per_channel = false;
};

struct FeatureReport {
  double shannon_entropy = 0.0;
  double spectral_entropy = 0.0;
  double sample_entropy = 0.0;
  double adf_gamma = 0.0;
  double higuchi_fd = 0.0;
  double pca_ev1 = 0.0;
  bool sample_entropy_no_matches = false;
  std::vector<std::size_t> dropped_channels;
  std::vector<std::vector<double>> per_channel; // rows follow the scalar order
};

inline FeatureReport characterize(const SeriesMatrix &series,
                                  const FeatureOptions &opts = {}) {
  if (series.channel_count() == 0)
    throw ValidationError(ValidationKind::DegenerateShape, "no channels");
  FeatureReport report;
  if (opts.per_channel)
    report.per_channel.assign(5, std::vector<double>());
  const auto n = static_cast<double>(series.channel_count());
  for (const auto &chan : series.channels) {
    const double sh = shannon_entropy(chan, opts.shannon_bins);
    const double sp = spectral_entropy(chan);
    const auto se = sample_entropy(chan, opts.sampen_m, opts.sampen_r);
    const double ad = adf_gamma(chan, opts.adf_lags);
    const double hi = higuchi_fd(chan, opts.higuchi_k_max);
    report.shannon_entropy += sh / n;
    report.spectral_entropy += sp / n;
    report.sample_entropy += se.value / n;
    report.sample_entropy_no_matches |= se.no_matches;
    report.adf_gamma += ad / n;
    report.higuchi_fd += hi / n;
    if (opts.per_channel) {
      report.per_channel[0].push_back(sh);
      report.per_channel[1].push_back(sp);
      report.per_channel[2].push_back(se.value);
      report.per_channel[3].push_back(ad);
      report.per_channel[4].push_back(hi);
    }
  }
  auto pca = pca_ev1(series);
  report.pca_ev1 = pca.ev1;
  report.dropped_channels = std::move(pca.dropped_channels);
  return report;
}

// Wide-format ingestion: one column per channel, optional leading timestamp
// column, header row required.
enum class TimestampColumn { AUTO, YES, NO };
enum class MissingPolicy { REJECT, FORWARD_FILL };

struct SeriesIngestOptions {
  char delimiter = ',';
  TimestampColumn timestamp = TimestampColumn::AUTO;
  MissingPolicy missing = MissingPolicy::REJECT;
  std::size_t stride = 1; // keep every stride-th row
};

namespace detail {

inline bool missing_token(std::string_view t) {
  return t.empty() || t == "NaN" || t == "nan" || t == "NA" || t == "na" ||
         t == "null";
}

inline bool numeric_token(std::string_view t) {
  if (missing_token(t)) return true; // a missing cell is not a timestamp
  double ignored;
  const auto *end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, ignored);
  return ec == std::errc() && ptr == end;
}

} // namespace detail

inline SeriesMatrix ingest_series(const std::string &path,
                                  const SeriesIngestOptions &opts = {}) {
  if (opts.stride == 0)
    throw ValidationError(ValidationKind::BadArgument, "stride must be >= 1");
  detail::CsvReader reader(path, opts.delimiter);
  std::vector<std::string> header;
  if (!reader.next(header))
    throw ValidationError(ValidationKind::EmptyCube,
                          path + ": no header row");

  std::vector<std::string> fields;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_nos; // physical rows, blank lines skipped
  while (reader.next(fields)) {
    if (fields.size() != header.size())
      throw ValidationError(ValidationKind::LengthMismatch,
                            path + " row " + std::to_string(reader.row) +
                                ": expected " + std::to_string(header.size()) +
                                " fields, got " +
                                std::to_string(fields.size()));
    rows.push_back(fields);
    row_nos.push_back(reader.row);
  }
  if (rows.size() < 2)
    throw ValidationError(ValidationKind::TooShort,
                          path + ": need at least two data rows");

  bool skip_first = false;
  if (opts.timestamp == TimestampColumn::YES) {
    skip_first = true;
  } else if (opts.timestamp == TimestampColumn::AUTO) {
    std::string lowered = header.front();
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    skip_first = lowered == "date" || lowered == "time" ||
                 lowered == "timestamp" ||
                 !detail::numeric_token(rows.front().front());
  }
  const std::size_t first_col = skip_first ? 1 : 0;
  if (first_col >= header.size())
    throw ValidationError(ValidationKind::DegenerateShape,
                          path + ": no numeric channels");

  SeriesMatrix series;
  {
    auto slash = path.find_last_of('/');
    auto stem = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = stem.find_last_of('.');
    series.name = dot == std::string::npos ? stem : stem.substr(0, dot);
  }
  const std::size_t n_channels = header.size() - first_col;
  series.channels.assign(n_channels, {});
  series.channel_names.assign(header.begin() + static_cast<long>(first_col),
                              header.end());

  for (std::size_t ri = 0; ri < rows.size(); ri += opts.stride) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      const auto &tok = rows[ri][first_col + c];
      const std::size_t row_no = row_nos[ri];
      auto &channel = series.channels[c];
      if (detail::missing_token(tok)) {
        if (opts.missing == MissingPolicy::REJECT || channel.empty())
          throw ValidationError(ValidationKind::MissingValue,
                                path + " row " + std::to_string(row_no) +
                                    ": missing value in column " +
                                    header[first_col + c]);
        channel.push_back(channel.back());
        ++series.filled_cells;
        continue;
      }
      const double v = detail::parse_double(tok, row_no);
      channel.push_back(v);
    }
  }
  if (series.timesteps() < 2)
    throw ValidationError(ValidationKind::TooShort,
                          path + ": fewer than two usable rows");
  return series;
}

} // namespace benchaudit
