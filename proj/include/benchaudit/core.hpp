#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "benchaudit/errors.hpp"

namespace benchaudit {

// ---------------------------------------------------------------------------
// Domain enumerations
// ---------------------------------------------------------------------------

enum class ErrorMetricKind { MSE, MAE };

inline std::string format_metric(ErrorMetricKind m) {
  return m == ErrorMetricKind::MSE ? "MSE" : "MAE";
}

inline ErrorMetricKind parse_metric(std::string_view s) {
  if (s == "MSE") return ErrorMetricKind::MSE;
  if (s == "MAE") return ErrorMetricKind::MAE;
  throw ValidationError(ValidationKind::BadArgument,
                        "unknown error metric '" + std::string(s) +
                            "' (expected MSE or MAE)");
}

enum class Direction { LOWER_BETTER, HIGHER_BETTER };

enum class EfficiencyKind {
  FLOPS,
  PARAMS,
  TRAIN_THROUGHPUT,
  TRAIN_MEMORY,
  TEST_THROUGHPUT,
  TEST_MEMORY,
};

// Throughputs are higher-is-better; cost and footprint kinds are lower-is-better.
inline Direction direction(EfficiencyKind k) {
  switch (k) {
  case EfficiencyKind::TRAIN_THROUGHPUT:
  case EfficiencyKind::TEST_THROUGHPUT:
    return Direction::HIGHER_BETTER;
  default:
    return Direction::LOWER_BETTER;
  }
}

inline std::string format_efficiency_kind(EfficiencyKind k) {
  switch (k) {
  case EfficiencyKind::FLOPS: return "FLOPS";
  case EfficiencyKind::PARAMS: return "PARAMS";
  case EfficiencyKind::TRAIN_THROUGHPUT: return "TRAIN_THROUGHPUT";
  case EfficiencyKind::TRAIN_MEMORY: return "TRAIN_MEMORY";
  case EfficiencyKind::TEST_THROUGHPUT: return "TEST_THROUGHPUT";
  case EfficiencyKind::TEST_MEMORY: return "TEST_MEMORY";
  }
  return "";
}

// Kinds parse case-insensitively against the closed enumeration.
inline std::optional<EfficiencyKind> try_parse_efficiency_kind(std::string_view s) {
  std::string u(s);
  std::transform(u.begin(), u.end(), u.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (u == "FLOPS") return EfficiencyKind::FLOPS;
  if (u == "PARAMS") return EfficiencyKind::PARAMS;
  if (u == "TRAIN_THROUGHPUT") return EfficiencyKind::TRAIN_THROUGHPUT;
  if (u == "TRAIN_MEMORY") return EfficiencyKind::TRAIN_MEMORY;
  if (u == "TEST_THROUGHPUT") return EfficiencyKind::TEST_THROUGHPUT;
  if (u == "TEST_MEMORY") return EfficiencyKind::TEST_MEMORY;
  return std::nullopt;
}

inline EfficiencyKind parse_efficiency_kind(std::string_view s) {
  if (auto k = try_parse_efficiency_kind(s)) return *k;
  throw ValidationError(ValidationKind::UnknownEfficiencyKind,
                        "unknown efficiency kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Records and cubes
// ---------------------------------------------------------------------------

struct ResultRecord {
  std::string model;
  std::string dataset;
  long horizon = 0;       // > 0
  long seed = 0;          // >= 0; 0 when the source had no seed column
  ErrorMetricKind metric = ErrorMetricKind::MSE;
  double value = 0.0;     // >= 0, finite
};

// Sparse (model, dataset, horizon, seed, metric) -> value collection.
// The index lists hold the distinct identifiers in first-seen ingestion
// order; downstream tie-breaking on order happens only where documented.
class ResultsCube {
public:
  using Key = std::tuple<std::string, std::string, long, long, int>;

  // Appends a record; the row number only labels error messages.
  void add(ResultRecord rec, std::size_t row = 0) {
    if (!(rec.horizon > 0))
      throw ValidationError(ValidationKind::OutOfRange,
                            "row " + std::to_string(row) +
                                ": horizon must be positive");
    if (rec.seed < 0)
      throw ValidationError(ValidationKind::OutOfRange,
                            "row " + std::to_string(row) +
                                ": seed must be non-negative");
    if (!std::isfinite(rec.value) || rec.value < 0.0)
      throw ValidationError(ValidationKind::NegativeError,
                            "row " + std::to_string(row) +
                                ": error value must be finite and >= 0");
    Key key{rec.model, rec.dataset, rec.horizon, rec.seed,
            static_cast<int>(rec.metric)};
    auto [it, inserted] = index_.emplace(std::move(key), records_.size());
    if (!inserted)
      throw ValidationError(ValidationKind::DuplicateKey,
                            "row " + std::to_string(row) + ": duplicate key (" +
                                rec.model + "," + rec.dataset + "," +
                                std::to_string(rec.horizon) + ",seed " +
                                std::to_string(rec.seed) + "," +
                                format_metric(rec.metric) + ")");
    note_first_seen(rec);
    records_.push_back(std::move(rec));
  }

  const std::vector<ResultRecord> &records() const { return records_; }
  const std::vector<std::string> &models() const { return models_; }
  const std::vector<std::string> &datasets() const { return datasets_; }
  const std::vector<long> &horizons() const { return horizons_; }
  bool empty() const { return records_.empty(); }

  const ResultRecord *find(const std::string &model, const std::string &dataset,
                           long horizon, long seed,
                           ErrorMetricKind metric) const {
    auto it = index_.find(
        Key{model, dataset, horizon, seed, static_cast<int>(metric)});
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  // All seed-indexed values behind one logical cell.
  std::vector<double> seed_values(const std::string &model,
                                  const std::string &dataset, long horizon,
                                  ErrorMetricKind metric) const {
    std::vector<double> out;
    auto lo = index_.lower_bound(Key{model, dataset, horizon,
                                     std::numeric_limits<long>::min(),
                                     std::numeric_limits<int>::min()});
    for (auto it = lo; it != index_.end(); ++it) {
      const auto &[m, d, h, s, mk] = it->first;
      if (m != model || d != dataset || h != horizon) break;
      if (mk == static_cast<int>(metric)) out.push_back(records_[it->second].value);
    }
    return out;
  }

  bool has_metric(ErrorMetricKind metric) const {
    return std::any_of(records_.begin(), records_.end(),
                       [&](const ResultRecord &r) { return r.metric == metric; });
  }

  // New cube without the named models/datasets/horizons, order preserved.
  ResultsCube filtered(const std::set<std::string> &drop_models,
                       const std::set<std::string> &drop_datasets,
                       const std::set<long> &drop_horizons) const {
    ResultsCube out;
    for (const auto &r : records_) {
      if (drop_models.count(r.model) || drop_datasets.count(r.dataset) ||
          drop_horizons.count(r.horizon))
        continue;
      out.add(r);
    }
    if (out.empty())
      throw ValidationError(ValidationKind::EmptyCube,
                            "exclusions removed every record");
    return out;
  }

private:
  void note_first_seen(const ResultRecord &rec) {
    if (std::find(models_.begin(), models_.end(), rec.model) == models_.end())
      models_.push_back(rec.model);
    if (std::find(datasets_.begin(), datasets_.end(), rec.dataset) ==
        datasets_.end())
      datasets_.push_back(rec.dataset);
    if (std::find(horizons_.begin(), horizons_.end(), rec.horizon) ==
        horizons_.end())
      horizons_.push_back(rec.horizon);
  }

  std::vector<ResultRecord> records_;
  std::map<Key, std::size_t> index_;
  std::vector<std::string> models_;
  std::vector<std::string> datasets_;
  std::vector<long> horizons_;
};

struct EfficiencyRecord {
  std::string model;
  std::optional<std::string> dataset;
  std::optional<long> horizon;
  EfficiencyKind kind = EfficiencyKind::FLOPS;
  double value = 0.0; // > 0 so ratios stay well-defined
};

class EfficiencyTable {
public:
  void add(EfficiencyRecord rec, std::size_t row = 0) {
    if (!std::isfinite(rec.value) || rec.value <= 0.0)
      throw ValidationError(ValidationKind::NonPositiveValue,
                            "row " + std::to_string(row) +
                                ": efficiency value must be finite and > 0");
    if (std::find(models_.begin(), models_.end(), rec.model) == models_.end())
      models_.push_back(rec.model);
    records_.push_back(std::move(rec));
  }

  const std::vector<EfficiencyRecord> &records() const { return records_; }
  const std::vector<std::string> &models() const { return models_; }

  bool has(const std::string &model, EfficiencyKind kind) const {
    return std::any_of(records_.begin(), records_.end(),
                       [&](const EfficiencyRecord &r) {
                         return r.model == model && r.kind == kind;
                       });
  }

  // Per-setting entries (dataset/horizon-tagged) average into one value
  // before any ratio is formed.
  double value(const std::string &model, EfficiencyKind kind) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &r : records_)
      if (r.model == model && r.kind == kind) {
        sum += r.value;
        ++n;
      }
    if (n == 0)
      throw ValidationError(ValidationKind::MissingEfficiencyKind,
                            "no " + format_efficiency_kind(kind) +
                                " entry for model '" + model + "'");
    return sum / static_cast<double>(n);
  }

private:
  std::vector<EfficiencyRecord> records_;
  std::vector<std::string> models_;
};

// ---------------------------------------------------------------------------
// Delimited-text ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == delim) {
      out.emplace_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

// Locale-independent strict parse; scientific notation accepted, NaN/Inf
// tokens and trailing junk rejected.
inline double parse_double(std::string_view tok, std::size_t row) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() ||
      !std::isfinite(v))
    throw ValidationError(ValidationKind::NonNumericValue,
                          "row " + std::to_string(row) +
                              ": non-numeric value '" + std::string(tok) + "'");
  return v;
}

inline long parse_long(std::string_view tok, std::size_t row,
                       const char *what) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ValidationError(ValidationKind::NonNumericValue,
                          "row " + std::to_string(row) + ": bad " + what +
                              " '" + std::string(tok) + "'");
  return v;
}

struct CsvReader {
  std::ifstream in;
  std::size_t row = 0; // 1-based physical row of the last line returned
  char delim;

  CsvReader(const std::string &path, char delim) : in(path), delim(delim) {
    if (!in)
      throw ValidationError(ValidationKind::IoFailure,
                            "cannot open '" + path + "'");
  }

  // Returns false at EOF; skips fully blank lines.
  bool next(std::vector<std::string> &fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      fields = split(line, delim);
      return true;
    }
    return false;
  }
};

inline std::size_t require_column(const std::vector<std::string> &header,
                                  const std::string &name,
                                  const std::string &path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw ValidationError(ValidationKind::MissingColumn,
                          path + ": missing required column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

inline std::optional<std::size_t> find_column(
    const std::vector<std::string> &header, const std::string &name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

} // namespace detail

// Column-name mapping for results files; defaults match the documented schema
// model,dataset,horizon,seed,metric,value.
struct ResultsSchema {
  std::string model = "model";
  std::string dataset = "dataset";
  std::string horizon = "horizon";
  std::string seed = "seed";
  std::string metric = "metric";
  std::string value = "value";
  char delimiter = ',';
};

inline ResultsCube ingest_results(const std::string &path,
                                  const ResultsSchema &schema = {}) {
  detail::CsvReader reader(path, schema.delimiter);
  std::vector<std::string> fields;
  if (!reader.next(fields))
    throw ValidationError(ValidationKind::EmptyCube,
                          path + ": file has no header row");
  const auto header = fields;
  const auto c_model = detail::require_column(header, schema.model, path);
  const auto c_dataset = detail::require_column(header, schema.dataset, path);
  const auto c_horizon = detail::require_column(header, schema.horizon, path);
  const auto c_metric = detail::require_column(header, schema.metric, path);
  const auto c_value = detail::require_column(header, schema.value, path);
  // Missing seed column: every record becomes a single-run seed-0 result.
  const auto c_seed = detail::find_column(header, schema.seed);

  ResultsCube cube;
  while (reader.next(fields)) {
    const std::size_t row = reader.row;
    if (fields.size() != header.size())
      throw ValidationError(ValidationKind::NonNumericValue,
                            "row " + std::to_string(row) + ": expected " +
                                std::to_string(header.size()) +
                                " fields, got " +
                                std::to_string(fields.size()));
    ResultRecord rec;
    rec.model = fields[c_model];
    rec.dataset = fields[c_dataset];
    rec.horizon = detail::parse_long(fields[c_horizon], row, "horizon");
    rec.seed = c_seed ? detail::parse_long(fields[*c_seed], row, "seed") : 0;
    try {
      rec.metric = parse_metric(fields[c_metric]);
    } catch (const ValidationError &e) {
      throw ValidationError(e.kind(),
                            "row " + std::to_string(row) + ": " + e.what());
    }
    rec.value = detail::parse_double(fields[c_value], row);
    cube.add(std::move(rec), row);
  }
  if (cube.empty())
    throw ValidationError(ValidationKind::EmptyCube,
                          path + ": no data rows after the header");
  return cube;
}

inline EfficiencyTable ingest_efficiency(const std::string &path,
                                         char delimiter = ',') {
  detail::CsvReader reader(path, delimiter);
  std::vector<std::string> fields;
  if (!reader.next(fields))
    throw ValidationError(ValidationKind::EmptyCube,
                          path + ": file has no header row");
  const auto header = fields;
  const auto c_model = detail::require_column(header, "model", path);
  const auto c_kind = detail::require_column(header, "kind", path);
  const auto c_value = detail::require_column(header, "value", path);
  const auto c_dataset = detail::find_column(header, "dataset");
  const auto c_horizon = detail::find_column(header, "horizon");

  EfficiencyTable table;
  while (reader.next(fields)) {
    const std::size_t row = reader.row;
    if (fields.size() != header.size())
      throw ValidationError(ValidationKind::NonNumericValue,
                            "row " + std::to_string(row) + ": expected " +
                                std::to_string(header.size()) +
                                " fields, got " +
                                std::to_string(fields.size()));
    EfficiencyRecord rec;
    rec.model = fields[c_model];
    rec.kind = parse_efficiency_kind(fields[c_kind]);
    rec.value = detail::parse_double(fields[c_value], row);
    if (c_dataset && !fields[*c_dataset].empty()) rec.dataset = fields[*c_dataset];
    if (c_horizon && !fields[*c_horizon].empty())
      rec.horizon = detail::parse_long(fields[*c_horizon], row, "horizon");
    if (rec.value <= 0.0)
      throw ValidationError(ValidationKind::NonPositiveValue,
                            "row " + std::to_string(row) +
                                ": efficiency value must be > 0");
    table.add(std::move(rec), row);
  }
  return table;
}

// Shortest round-trip formatting, so serialize -> ingest is the identity on
// the record set.
inline std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_results(const ResultsCube &cube, std::ostream &out,
                          char delimiter = ',') {
  const char d = delimiter;
  out << "model" << d << "dataset" << d << "horizon" << d << "seed" << d
      << "metric" << d << "value\n";
  for (const auto &r : cube.records())
    out << r.model << d << r.dataset << d << r.horizon << d << r.seed << d
        << format_metric(r.metric) << d << format_value(r.value) << "\n";
}

inline void write_results(const ResultsCube &cube, const std::string &path,
                          char delimiter = ',') {
  std::ofstream out(path);
  if (!out)
    throw ValidationError(ValidationKind::IoFailure,
                          "cannot write '" + path + "'");
  write_results(cube, out, delimiter);
}

} // namespace benchaudit
