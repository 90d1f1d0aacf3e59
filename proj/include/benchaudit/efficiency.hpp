#pragma once

// Efficiency-weighted error ratio: xi(m) = (eps(b)/eps(m)) * prod over Phi of
// (phi_k(b)/phi_k(m))^(s_k * w), s_k = +1 where lower is better and -1 where
// higher is better, so a baseline that is at least as efficient contributes
// factors in (0, 1]. The baseline scores exactly 1 by construction.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "benchaudit/aggregate.hpp"
#include "benchaudit/core.hpp"
#include "benchaudit/errors.hpp"

namespace benchaudit {

struct XiSpec {
  std::string baseline;
  std::vector<EfficiencyKind> phi_set;
  double weight = 0.07;
  ErrorMetricKind error_metric = ErrorMetricKind::MSE;
};

struct XiReport {
  std::vector<std::string> models;
  std::vector<double> per_model;
  XiSpec spec;
};

struct PhiFactor {
  double baseline_value = 0.0;
  double model_value = 0.0;
  Direction dir = Direction::LOWER_BETTER;
};

inline double xi(double model_error, double baseline_error,
                 const std::vector<PhiFactor> &factors, double weight) {
  if (!(model_error > 0.0) || !(baseline_error > 0.0))
    throw ValidationError(ValidationKind::NonPositiveInput,
                          "errors must be strictly positive");
  if (!std::isfinite(weight) || weight < 0.0)
    throw ValidationError(ValidationKind::BadArgument,
                          "weight must be finite and non-negative");
  double value = baseline_error / model_error;
  for (const auto &f : factors) {
    if (!(f.baseline_value > 0.0) || !(f.model_value > 0.0))
      throw ValidationError(ValidationKind::NonPositiveInput,
                            "efficiency values must be strictly positive");
    const double s = f.dir == Direction::LOWER_BETTER ? 1.0 : -1.0;
    value *= std::pow(f.baseline_value / f.model_value, s * weight);
  }
  return value;
}

// Candidate baseline that is at least as efficient as every other model on
// every kind in phi_set; the penalty interpretation of xi needs one. Callers
// are expected to echo the selection, never apply it silently.
inline std::string select_baseline(const EfficiencyTable &efficiency,
                                   const std::vector<std::string> &models,
                                   const std::vector<EfficiencyKind> &phi_set) {
  if (models.empty() || phi_set.empty())
    throw ValidationError(ValidationKind::BadArgument,
                          "need candidate models and at least one kind");
  for (const auto &candidate : models) {
    bool dominant = true;
    for (auto kind : phi_set) {
      const double own = efficiency.value(candidate, kind);
      for (const auto &other : models) {
        const double theirs = efficiency.value(other, kind);
        const bool worse = direction(kind) == Direction::LOWER_BETTER
                               ? own > theirs
                               : own < theirs;
        if (worse) {
          dominant = false;
          break;
        }
      }
      if (!dominant) break;
    }
    if (dominant) return candidate;
  }
  throw ValidationError(ValidationKind::BadArgument,
                        "no model dominates every requested efficiency kind");
}

// Leaderboard over a horizon-averaged table: eps(m) is the mean of the
// model's dataset averages (minus exclusions), phi_k(m) the table value
// averaged over any per-setting entries before ratio-forming.
inline XiReport xi_leaderboard(const AggregatedTable &results,
                               const EfficiencyTable &efficiency,
                               const XiSpec &spec,
                               const std::set<std::string> &exclude_datasets = {}) {
  if (spec.phi_set.empty())
    throw ValidationError(ValidationKind::BadArgument,
                          "phi_set must name at least one efficiency kind");
  for (const auto &d : exclude_datasets)
    if (std::find(results.datasets.begin(), results.datasets.end(), d) ==
        results.datasets.end())
      throw ValidationError(ValidationKind::BadArgument,
                            "excluded dataset " + d + " is not in the table");

  std::vector<std::size_t> kept;
  for (std::size_t di = 0; di < results.datasets.size(); ++di)
    if (!exclude_datasets.count(results.datasets[di])) kept.push_back(di);
  if (kept.empty())
    throw ValidationError(ValidationKind::BadArgument,
                          "every dataset was excluded");

  auto model_index = [&](const std::string &name) {
    auto it = std::find(results.models.begin(), results.models.end(), name);
    if (it == results.models.end())
      throw ValidationError(ValidationKind::MissingModel,
                            "model " + name + " has no results");
    return static_cast<std::size_t>(it - results.models.begin());
  };
  const std::size_t bi = model_index(spec.baseline);
  const auto &eff_models = efficiency.models();
  for (const auto &m : results.models)
    if (std::find(eff_models.begin(), eff_models.end(), m) == eff_models.end())
      throw ValidationError(ValidationKind::MissingModel,
                            "model " + m + " has no efficiency entries");

  auto eps = [&](std::size_t mi) {
    double sum = 0.0;
    for (std::size_t di : kept) sum += results.values[mi][di];
    return sum / static_cast<double>(kept.size());
  };
  const double baseline_error = eps(bi);

  XiReport report;
  report.models = results.models;
  report.spec = spec;
  report.per_model.resize(results.models.size());
  for (std::size_t mi = 0; mi < results.models.size(); ++mi) {
    std::vector<PhiFactor> factors;
    factors.reserve(spec.phi_set.size());
    for (auto kind : spec.phi_set)
      factors.push_back({efficiency.value(spec.baseline, kind),
                         efficiency.value(results.models[mi], kind),
                         direction(kind)});
    report.per_model[mi] = xi(eps(mi), baseline_error, factors, spec.weight);
  }
  return report;
}

} // namespace benchaudit
