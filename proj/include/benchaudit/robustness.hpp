#pragma once

// Monte-Carlo subset-robustness experiment: resample which datasets and
// horizons a benchmark "happened to include" and watch how often each model
// comes out on top. Fully deterministic for a given master seed regardless of
// worker count: every configuration owns a hash-derived PRNG substream and a
// disjoint slice of the score buffer, and the reduction runs serially in
// configuration order.

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "benchaudit/aggregate.hpp"
#include "benchaudit/core.hpp"
#include "benchaudit/errors.hpp"
#include "benchaudit/rng.hpp"

namespace benchaudit {

struct RobustnessConfig {
  std::size_t k_samples = 5000;
  std::uint64_t master_seed = 0;
  std::vector<std::string> dataset_pool;
  std::vector<long> horizon_pool;
  ErrorMetricKind metric = ErrorMetricKind::MSE;
};

struct ModelRobustness {
  double win_pct = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
};

struct RobustnessReport {
  std::vector<std::string> models;
  std::vector<ModelRobustness> per_model;
  std::size_t k_samples = 0;
  std::uint64_t master_seed = 0;
};

// One experimental configuration: subset sizes drawn uniformly from {1..M}
// and {1..H}, then uniform simple random subsets of those sizes. Consumes the
// stream in a fixed order: dataset size, horizon size, dataset subset,
// horizon subset.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
sample_configuration(Xoshiro256pp &rng, std::size_t n_datasets,
                     std::size_t n_horizons) {
  if (n_datasets == 0 || n_horizons == 0)
    throw ValidationError(ValidationKind::OutOfRange,
                          "pools must be non-empty");
  const auto k_d = static_cast<std::size_t>(rng.below(n_datasets)) + 1;
  const auto k_h = static_cast<std::size_t>(rng.below(n_horizons)) + 1;
  auto datasets = sample_subset(rng, n_datasets, k_d);
  auto horizons = sample_subset(rng, n_horizons, k_h);
  return {std::move(datasets), std::move(horizons)};
}

namespace detail {

// Dense cell matrix values[model][dataset * H + horizon] over the pools.
inline std::vector<std::vector<double>>
robustness_cells(const ResultsCube &cube, const RobustnessConfig &cfg) {
  std::vector<std::vector<double>> values(
      cube.models().size(),
      std::vector<double>(cfg.dataset_pool.size() * cfg.horizon_pool.size()));
  for (std::size_t mi = 0; mi < cube.models().size(); ++mi)
    for (std::size_t di = 0; di < cfg.dataset_pool.size(); ++di)
      for (std::size_t hi = 0; hi < cfg.horizon_pool.size(); ++hi) {
        try {
          values[mi][di * cfg.horizon_pool.size() + hi] = single_cell_value(
              cube, cube.models()[mi], cfg.dataset_pool[di],
              cfg.horizon_pool[hi], cfg.metric);
        } catch (const ValidationError &e) {
          if (e.kind() == ValidationKind::MissingCell)
            throw ValidationError(ValidationKind::IncompleteCube, e.what());
          throw;
        }
      }
  return values;
}

} // namespace detail

inline RobustnessReport run_robustness(const ResultsCube &cube,
                                       const RobustnessConfig &cfg,
                                       unsigned n_workers = 0) {
  if (cfg.k_samples == 0)
    throw ValidationError(ValidationKind::BadArgument, "k_samples must be >= 1");
  if (cfg.dataset_pool.empty() || cfg.horizon_pool.empty())
    throw ValidationError(ValidationKind::BadArgument,
                          "dataset and horizon pools must be non-empty");
  if (std::set<std::string>(cfg.dataset_pool.begin(), cfg.dataset_pool.end())
          .size() != cfg.dataset_pool.size() ||
      std::set<long>(cfg.horizon_pool.begin(), cfg.horizon_pool.end()).size() !=
          cfg.horizon_pool.size())
    throw ValidationError(ValidationKind::BadArgument,
                          "pools must not repeat entries");

  const auto values = detail::robustness_cells(cube, cfg);
  const std::size_t n_models = cube.models().size();
  const std::size_t n_d = cfg.dataset_pool.size();
  const std::size_t n_h = cfg.horizon_pool.size();
  const std::size_t k = cfg.k_samples;

  // Phase 1 (parallel): each configuration writes its own slice of `scores`.
  std::vector<double> scores(k * n_models);
  auto fill_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      Xoshiro256pp rng(substream_seed(cfg.master_seed, c));
      const auto [sel_d, sel_h] = sample_configuration(rng, n_d, n_h);
      const double denom = static_cast<double>(sel_d.size() * sel_h.size());
      for (std::size_t mi = 0; mi < n_models; ++mi) {
        double sum = 0.0;
        for (std::size_t di : sel_d)
          for (std::size_t hi : sel_h) sum += values[mi][di * n_h + hi];
        scores[c * n_models + mi] = sum / denom;
      }
    }
  };

  if (n_workers == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n_workers = hw == 0 ? 1 : std::min(hw, 16u);
  }
  n_workers = std::min<std::size_t>(n_workers, k);
  if (n_workers <= 1) {
    fill_range(0, k);
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (k + n_workers - 1) / n_workers;
    for (unsigned w = 0; w < n_workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(k, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back(fill_range, begin, end);
    }
    for (auto &t : workers) t.join();
  }

  // Phase 2 (serial, fixed order): wins and moments.
  std::vector<double> wins(n_models, 0.0), mean(n_models, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const double *row = scores.data() + c * n_models;
    double best = row[0];
    for (std::size_t mi = 1; mi < n_models; ++mi) best = std::min(best, row[mi]);
    std::size_t winners = 0;
    for (std::size_t mi = 0; mi < n_models; ++mi)
      if (row[mi] == best) ++winners;
    for (std::size_t mi = 0; mi < n_models; ++mi) {
      if (row[mi] == best) wins[mi] += 1.0 / static_cast<double>(winners);
      mean[mi] += row[mi];
    }
  }
  for (auto &m : mean) m /= static_cast<double>(k);

  std::vector<double> var(n_models, 0.0);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t mi = 0; mi < n_models; ++mi) {
      const double d = scores[c * n_models + mi] - mean[mi];
      var[mi] += d * d;
    }

  RobustnessReport report;
  report.models = cube.models();
  report.k_samples = k;
  report.master_seed = cfg.master_seed;
  report.per_model.resize(n_models);
  for (std::size_t mi = 0; mi < n_models; ++mi) {
    report.per_model[mi].win_pct = wins[mi] * 100.0 / static_cast<double>(k);
    report.per_model[mi].mean_error = mean[mi];
    // Population standard deviation over the K sampled configurations.
    report.per_model[mi].std_error =
        std::sqrt(var[mi] / static_cast<double>(k));
  }
  return report;
}

} // namespace benchaudit
