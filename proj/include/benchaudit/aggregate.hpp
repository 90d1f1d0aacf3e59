#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "benchaudit/core.hpp"
#include "benchaudit/errors.hpp"

namespace benchaudit {

enum class SeedStatistic { MEAN_OVER_SEEDS, MIN_OVER_SEEDS };

inline std::string format_statistic(SeedStatistic s) {
  return s == SeedStatistic::MEAN_OVER_SEEDS ? "mean" : "min";
}

// Dense (model, dataset) -> value table, averaged over horizons_used.
struct AggregatedTable {
  ErrorMetricKind metric = ErrorMetricKind::MSE;
  SeedStatistic statistic = SeedStatistic::MEAN_OVER_SEEDS;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  std::vector<long> horizons_used;
  std::vector<std::vector<double>> values; // [model index][dataset index]

  double at(std::size_t model_idx, std::size_t dataset_idx) const {
    return values[model_idx][dataset_idx];
  }

  double value_of(const std::string &model, const std::string &dataset) const {
    auto mi = std::find(models.begin(), models.end(), model);
    auto di = std::find(datasets.begin(), datasets.end(), dataset);
    if (mi == models.end() || di == datasets.end())
      throw ValidationError(ValidationKind::UnknownModel,
                            "no cell (" + model + "," + dataset + ")");
    return values[mi - models.begin()][di - datasets.begin()];
  }
};

struct RankTable {
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  std::vector<std::vector<double>> ranks; // [model index][dataset index]
  std::vector<double> avg_rank;           // per model
};

struct WinRateReport {
  std::vector<std::string> models;
  std::vector<double> per_model; // win percentage, [0, 100]
  std::size_t cells_counted = 0;
};

// Ascending competition ranks with ties assigned the average of the tied
// positions, so each group of k values always consumes ranks summing to
// k(k+1)/2. Equality is exact floating comparison by design: inputs are
// parsed table values, and epsilon ties would silently alter published ranks.
inline std::vector<double> rank_with_ties(const std::vector<double> &values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

// One value per (model, dataset, horizon) cell of the chosen metric; throws
// if seeds have not been collapsed yet, since silently mixing seed runs into
// horizon averages would blur two different statistics.
inline double single_cell_value(const ResultsCube &cube, const std::string &model,
                                const std::string &dataset, long horizon,
                                ErrorMetricKind metric) {
  auto vals = cube.seed_values(model, dataset, horizon, metric);
  if (vals.empty())
    throw ValidationError(ValidationKind::MissingCell,
                          "missing cell (" + model + "," + dataset + "," +
                              std::to_string(horizon) + "," +
                              format_metric(metric) + ")");
  if (vals.size() > 1)
    throw ValidationError(ValidationKind::BadArgument,
                          "cell (" + model + "," + dataset + "," +
                              std::to_string(horizon) +
                              ") has multiple seeds; collapse seeds first");
  return vals.front();
}

} // namespace detail

// Collapses the seed dimension of the chosen metric; the returned cube
// carries only that metric, with every record at seed 0.
inline ResultsCube aggregate_seeds(const ResultsCube &cube,
                                   SeedStatistic statistic,
                                   ErrorMetricKind metric) {
  if (!cube.has_metric(metric))
    throw ValidationError(ValidationKind::MetricAbsent,
                          "cube has no " + format_metric(metric) + " records");
  ResultsCube out;
  std::set<std::tuple<std::string, std::string, long>> seen;
  for (const auto &r : cube.records()) {
    if (r.metric != metric) continue;
    if (!seen.emplace(r.model, r.dataset, r.horizon).second) continue;
    const auto vals = cube.seed_values(r.model, r.dataset, r.horizon, metric);
    double v;
    if (statistic == SeedStatistic::MEAN_OVER_SEEDS)
      v = std::accumulate(vals.begin(), vals.end(), 0.0) /
          static_cast<double>(vals.size());
    else
      v = *std::min_element(vals.begin(), vals.end());
    out.add({r.model, r.dataset, r.horizon, 0, metric, v});
  }
  return out;
}

// Arithmetic mean over the horizon subset per (model, dataset); empty subset
// means every horizon in the cube. Requires a seed-collapsed cube and errors
// on any missing cell rather than dropping rows, since selective omission is
// exactly the distortion this toolkit exists to expose.
inline AggregatedTable average_over_horizons(const ResultsCube &cube,
                                             ErrorMetricKind metric,
                                             const std::vector<long> &horizons = {},
                                             SeedStatistic statistic_label =
                                                 SeedStatistic::MEAN_OVER_SEEDS) {
  std::vector<long> used;
  if (horizons.empty()) {
    used = cube.horizons();
  } else {
    for (long h : cube.horizons())
      if (std::find(horizons.begin(), horizons.end(), h) != horizons.end())
        used.push_back(h);
    for (long h : horizons)
      if (std::find(used.begin(), used.end(), h) == used.end())
        throw ValidationError(ValidationKind::MissingCell,
                              "requested horizon " + std::to_string(h) +
                                  " not present in the results");
  }
  AggregatedTable table;
  table.metric = metric;
  table.statistic = statistic_label;
  table.models = cube.models();
  table.datasets = cube.datasets();
  table.horizons_used = used;
  table.values.assign(table.models.size(),
                      std::vector<double>(table.datasets.size(), 0.0));
  for (std::size_t mi = 0; mi < table.models.size(); ++mi)
    for (std::size_t di = 0; di < table.datasets.size(); ++di) {
      double sum = 0.0;
      for (long h : used)
        sum += detail::single_cell_value(cube, table.models[mi],
                                         table.datasets[di], h, metric);
      table.values[mi][di] = sum / static_cast<double>(used.size());
    }
  return table;
}

// Per dataset: ascending-by-error average ranks; avg_rank is the per-model
// mean over datasets.
inline RankTable rank_models(const AggregatedTable &table) {
  if (table.models.empty() || table.datasets.empty())
    throw ValidationError(ValidationKind::IncompleteTable,
                          "cannot rank an empty table");
  if (table.values.size() != table.models.size())
    throw ValidationError(ValidationKind::IncompleteTable,
                          "table has a value row per model missing");
  for (const auto &row : table.values)
    if (row.size() != table.datasets.size())
      throw ValidationError(ValidationKind::IncompleteTable,
                            "table row shorter than the dataset list");
  RankTable rt;
  rt.models = table.models;
  rt.datasets = table.datasets;
  rt.ranks.assign(table.models.size(),
                  std::vector<double>(table.datasets.size(), 0.0));
  rt.avg_rank.assign(table.models.size(), 0.0);
  for (std::size_t di = 0; di < table.datasets.size(); ++di) {
    std::vector<double> column(table.models.size());
    for (std::size_t mi = 0; mi < table.models.size(); ++mi)
      column[mi] = table.values[mi][di];
    const auto ranks = rank_with_ties(column);
    for (std::size_t mi = 0; mi < table.models.size(); ++mi) {
      rt.ranks[mi][di] = ranks[mi];
      rt.avg_rank[mi] += ranks[mi];
    }
  }
  for (auto &r : rt.avg_rank) r /= static_cast<double>(table.datasets.size());
  return rt;
}

enum class WinGranularity { PER_HORIZON, PER_DATASET };

// Each cell awards one win to the strict minimizer; exact ties split the win
// equally, keeping the total at 100% regardless of visit order.
inline WinRateReport win_rate(const ResultsCube &cube, ErrorMetricKind metric,
                              WinGranularity granularity) {
  WinRateReport report;
  report.models = cube.models();
  report.per_model.assign(report.models.size(), 0.0);

  std::vector<std::vector<double>> cells;
  try {
    if (granularity == WinGranularity::PER_HORIZON) {
      for (const auto &ds : cube.datasets())
        for (long h : cube.horizons()) {
          std::vector<double> cell(report.models.size());
          for (std::size_t mi = 0; mi < report.models.size(); ++mi)
            cell[mi] = detail::single_cell_value(cube, report.models[mi], ds, h,
                                                 metric);
          cells.push_back(std::move(cell));
        }
    } else {
      const auto table = average_over_horizons(cube, metric);
      for (std::size_t di = 0; di < table.datasets.size(); ++di) {
        std::vector<double> cell(report.models.size());
        for (std::size_t mi = 0; mi < report.models.size(); ++mi)
          cell[mi] = table.values[mi][di];
        cells.push_back(std::move(cell));
      }
    }
  } catch (const ValidationError &e) {
    if (e.kind() == ValidationKind::MissingCell)
      throw ValidationError(ValidationKind::IncompleteTable, e.what());
    throw;
  }

  for (const auto &cell : cells) {
    const double best = *std::min_element(cell.begin(), cell.end());
    const auto winners =
        std::count_if(cell.begin(), cell.end(), [&](double v) { return v == best; });
    for (std::size_t mi = 0; mi < cell.size(); ++mi)
      if (cell[mi] == best)
        report.per_model[mi] += 1.0 / static_cast<double>(winners);
  }
  report.cells_counted = cells.size();
  for (auto &w : report.per_model)
    w *= 100.0 / static_cast<double>(cells.size());
  return report;
}

} // namespace benchaudit
