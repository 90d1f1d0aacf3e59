// benchaudit: audit long-horizon forecasting benchmarks from the command
// line. Every subcommand reads the shared CSV formats, writes machine and
// markdown reports into --out, and drops a provenance manifest next to them.
// Exit codes: 0 ok, 2 input validation, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>
#include <unistd.h>

#include "CLI11.hpp"
#include "benchaudit/benchaudit.hpp"

namespace ba = benchaudit;

namespace {

std::string g_command_line;
int g_exit_code = 0;

bool color_enabled() {
  return ::isatty(1) != 0 && std::getenv("NO_COLOR") == nullptr;
}

void note_outputs(const std::vector<std::string> &paths) {
  std::cout << (color_enabled() ? "\x1b[32mok\x1b[0m: wrote" : "ok: wrote");
  for (const auto &p : paths) std::cout << " " << p;
  std::cout << "\n";
}

std::string quote_arg(const std::string &arg) {
  if (!arg.empty() && arg.find_first_of(" \t\"\\") == std::string::npos)
    return arg;
  std::string out = "\"";
  for (char c : arg) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string join_command(int argc, char **argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += " ";
    out += quote_arg(argv[i]);
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string out_path(const std::string &dir, const std::string &name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ba::ValidationError(ba::ValidationKind::IoFailure,
                              "cannot open '" + path + "' for writing");
  out << content;
  if (!out)
    throw ba::ValidationError(ba::ValidationKind::IoFailure,
                              "short write to '" + path + "'");
}

void write_manifest_for(const std::string &dir, const std::string &prefix,
                        const std::vector<std::string> &inputs,
                        std::optional<std::uint64_t> seed,
                        std::vector<std::string> &written) {
  ba::RunManifest manifest;
  manifest.command_line = g_command_line;
  for (const auto &in : inputs) manifest.add_input(in);
  manifest.master_seed = seed;
  const auto path = out_path(dir, prefix + "_manifest.json");
  ba::write_manifest(manifest, path);
  written.push_back(path);
}

// ---------------------------------------------------------------------------
// Shared results-table options
// ---------------------------------------------------------------------------

struct ResultsArgs {
  std::string results;
  std::string metric = "MSE";
  std::string stat = "mean";
  std::vector<long> horizons;
  std::string out = ".";
};

void add_results_flags(CLI::App *sub, ResultsArgs &args) {
  sub->add_option("--results", args.results,
                  "Results CSV: model,dataset,horizon[,seed],metric,value")
      ->required();
  sub->add_option("--metric", args.metric, "Error metric to analyze")
      ->check(CLI::IsMember({"MSE", "MAE"}))
      ->capture_default_str();
  sub->add_option("--stat", args.stat, "Statistic over seeds")
      ->check(CLI::IsMember({"mean", "min"}))
      ->capture_default_str();
  sub->add_option("--horizons", args.horizons,
                  "Horizon subset (default: every horizon present)")
      ->delimiter(',');
  sub->add_option("--out", args.out, "Output directory")
      ->capture_default_str();
}

ba::SeedStatistic stat_of(const ResultsArgs &args) {
  return args.stat == "mean" ? ba::SeedStatistic::MEAN_OVER_SEEDS
                             : ba::SeedStatistic::MIN_OVER_SEEDS;
}

ba::AggregatedTable load_table(const ResultsArgs &args) {
  const auto metric = ba::parse_metric(args.metric);
  auto collapsed =
      ba::aggregate_seeds(ba::ingest_results(args.results), stat_of(args), metric);
  return ba::average_over_horizons(collapsed, metric, args.horizons,
                                   stat_of(args));
}

std::string rank_markdown(const ba::AggregatedTable &table,
                          const ba::RankTable &ranks,
                          const ResultsArgs &args) {
  std::string md = "# Model ranking (" + args.metric + ", " + args.stat +
                   " over seeds)\n\n";
  md += ba::render_table(table, ba::TableFormat::MARKDOWN);
  md += "\nAverage rank per model (lower is better):\n\n";
  md += "| Model | Avg rank |\n| --- | --- |\n";
  for (std::size_t i = 0; i < ranks.models.size(); ++i)
    md += "| " + ranks.models[i] + " | " + fmt4(ranks.avg_rank[i]) + " |\n";
  return md;
}

void run_rank(const ResultsArgs &args) {
  const auto table = load_table(args);
  const auto ranks = ba::rank_models(table);
  std::string csv = "model,avg_rank\n";
  for (std::size_t i = 0; i < ranks.models.size(); ++i)
    csv += ranks.models[i] + "," + fmt(ranks.avg_rank[i]) + "\n";

  std::vector<std::string> written;
  written.push_back(out_path(args.out, "rank.csv"));
  write_text(written.back(), csv);
  written.push_back(out_path(args.out, "rank_table.csv"));
  write_text(written.back(),
             ba::render_table(table, ba::TableFormat::DELIMITED));
  written.push_back(out_path(args.out, "rank.md"));
  write_text(written.back(), rank_markdown(table, ranks, args));
  write_manifest_for(args.out, "rank", {args.results}, std::nullopt, written);
  note_outputs(written);
}

std::string friedman_markdown(const ba::FriedmanReport &rep,
                              const ResultsArgs &args) {
  std::string md = "# Friedman test (" + args.metric + ")\n\n";
  md += "Chi-squared statistic " + fmt4(rep.chi2) + " with " +
        std::to_string(rep.dof) + " degrees of freedom over " +
        std::to_string(rep.n_datasets) + " datasets and " +
        std::to_string(rep.n_models) + " models; p = " + fmt(rep.p_value) +
        ".\n";
  if (rep.p_clamped)
    md += "\nThe p-value fell below 1e-300 and was clamped to 0.\n";
  if (rep.small_sample_warning)
    md += "\nSmall-sample warning: the chi-squared approximation is rough "
          "for N <= 10 or k <= 5; prefer the exact sign test for pairs.\n";
  md += "\n| Model | Avg rank |\n| --- | --- |\n";
  for (std::size_t i = 0; i < rep.models.size(); ++i)
    md += "| " + rep.models[i] + " | " + fmt4(rep.avg_ranks[i]) + " |\n";
  return md;
}

void run_friedman(const ResultsArgs &args) {
  const auto rep = ba::friedman(load_table(args));
  std::string csv = "key,value\n";
  csv += "n_datasets," + std::to_string(rep.n_datasets) + "\n";
  csv += "n_models," + std::to_string(rep.n_models) + "\n";
  csv += "chi2," + fmt(rep.chi2) + "\n";
  csv += "dof," + std::to_string(rep.dof) + "\n";
  csv += "p_value," + fmt(rep.p_value) + "\n";
  csv += std::string("p_clamped,") + (rep.p_clamped ? "1" : "0") + "\n";
  csv += std::string("small_sample_warning,") +
         (rep.small_sample_warning ? "1" : "0") + "\n";
  std::string ranks_csv = "model,avg_rank\n";
  for (std::size_t i = 0; i < rep.models.size(); ++i)
    ranks_csv += rep.models[i] + "," + fmt(rep.avg_ranks[i]) + "\n";

  std::vector<std::string> written;
  written.push_back(out_path(args.out, "friedman.csv"));
  write_text(written.back(), csv);
  written.push_back(out_path(args.out, "friedman_ranks.csv"));
  write_text(written.back(), ranks_csv);
  written.push_back(out_path(args.out, "friedman.md"));
  write_text(written.back(), friedman_markdown(rep, args));
  write_manifest_for(args.out, "friedman", {args.results}, std::nullopt,
                     written);
  note_outputs(written);
}

struct SignArgs : ResultsArgs {
  std::string model_a;
  std::string model_b;
};

void run_signtest(const SignArgs &args) {
  const auto table = load_table(args);
  for (const auto *m : {&args.model_a, &args.model_b})
    if (std::find(table.models.begin(), table.models.end(), *m) ==
        table.models.end())
      throw ba::ValidationError(ba::ValidationKind::UnknownModel,
                                "model '" + *m + "' is not in the results");
  std::vector<double> va, vb;
  for (const auto &d : table.datasets) {
    va.push_back(table.value_of(args.model_a, d));
    vb.push_back(table.value_of(args.model_b, d));
  }
  const auto rep = ba::sign_test(va, vb);

  std::string csv = "key,value\n";
  csv += "model_a," + args.model_a + "\n";
  csv += "model_b," + args.model_b + "\n";
  csv += "n_datasets," + std::to_string(table.datasets.size()) + "\n";
  csv += "wins_a," + fmt(rep.wins_a) + "\n";
  csv += "wins_b," + fmt(rep.wins_b) + "\n";
  csv += "ties_raw," + std::to_string(rep.ties_raw) + "\n";
  csv += "n_effective," + std::to_string(rep.n_effective) + "\n";
  csv += "p_one_sided," + fmt(rep.p_one_sided) + "\n";
  csv += "p_two_sided," + fmt(rep.p_two_sided) + "\n";
  csv += "headline,two_sided\n";

  std::string md = "# Sign test: " + args.model_a + " vs " + args.model_b +
                   " (" + args.metric + ")\n\n";
  md += args.model_a + " wins " + fmt(rep.wins_a) + " of " +
        std::to_string(rep.n_effective) + " effective paired datasets (ties "
        "split evenly, one discarded when odd).\n\n";
  md += "Two-sided p = " + fmt(rep.p_two_sided) +
        " (headline); one-sided p = " + fmt(rep.p_one_sided) +
        ". Single published p-values rarely state their sidedness, so both "
        "are reported.\n";

  std::vector<std::string> written;
  written.push_back(out_path(args.out, "signtest.csv"));
  write_text(written.back(), csv);
  written.push_back(out_path(args.out, "signtest.md"));
  write_text(written.back(), md);
  write_manifest_for(args.out, "signtest", {args.results}, std::nullopt,
                     written);
  note_outputs(written);
}

// ---------------------------------------------------------------------------
// Robustness
// ---------------------------------------------------------------------------

struct RobustArgs : ResultsArgs {
  std::size_t samples = 5000;
  std::uint64_t seed = 0;
  bool ephemeral = false;
  std::size_t workers = 0;
  std::vector<std::string> exclude_datasets;
  std::vector<std::string> exclude_models;
  std::vector<long> exclude_horizons;
};

ba::ResultsCube load_filtered_cube(const RobustArgs &args) {
  auto cube = ba::ingest_results(args.results);
  for (const auto &m : args.exclude_models)
    if (std::find(cube.models().begin(), cube.models().end(), m) ==
        cube.models().end())
      throw ba::ValidationError(ba::ValidationKind::UnknownModel,
                                "cannot exclude unknown model '" + m + "'");
  for (const auto &d : args.exclude_datasets)
    if (std::find(cube.datasets().begin(), cube.datasets().end(), d) ==
        cube.datasets().end())
      throw ba::ValidationError(ba::ValidationKind::BadArgument,
                                "cannot exclude unknown dataset '" + d + "'");
  for (long h : args.exclude_horizons)
    if (std::find(cube.horizons().begin(), cube.horizons().end(), h) ==
        cube.horizons().end())
      throw ba::ValidationError(ba::ValidationKind::BadArgument,
                                "cannot exclude unknown horizon " +
                                    std::to_string(h));
  if (!args.exclude_models.empty() || !args.exclude_datasets.empty() ||
      !args.exclude_horizons.empty())
    cube = cube.filtered(
        {args.exclude_models.begin(), args.exclude_models.end()},
        {args.exclude_datasets.begin(), args.exclude_datasets.end()},
        {args.exclude_horizons.begin(), args.exclude_horizons.end()});
  return cube;
}

void run_robustness(const RobustArgs &args, bool seeded) {
  std::uint64_t seed = args.seed;
  if (!seeded) {
    if (!args.ephemeral)
      throw ba::ValidationError(
          ba::ValidationKind::BadArgument,
          "--seed is required for a reproducible run; pass --ephemeral to "
          "draw one (it is still recorded in the manifest)");
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  const auto metric = ba::parse_metric(args.metric);
  auto collapsed =
      ba::aggregate_seeds(load_filtered_cube(args), stat_of(args), metric);

  ba::RobustnessConfig cfg;
  cfg.k_samples = args.samples;
  cfg.master_seed = seed;
  cfg.dataset_pool = collapsed.datasets();
  cfg.horizon_pool = collapsed.horizons();
  cfg.metric = metric;
  const auto rep = ba::run_robustness(collapsed, cfg, args.workers);

  std::string csv = "model,win_pct,mean_error,std_error\n";
  for (std::size_t i = 0; i < rep.models.size(); ++i)
    csv += rep.models[i] + "," + fmt(rep.per_model[i].win_pct) + "," +
           fmt(rep.per_model[i].mean_error) + "," +
           fmt(rep.per_model[i].std_error) + "\n";

  std::string md = "# Subset-resampling robustness (" + args.metric + ")\n\n";
  md += std::to_string(rep.k_samples) +
        " sampled experimental configurations, master seed " +
        std::to_string(rep.master_seed) + ".\n\n";
  md += "| Model | Win % | Mean error | Std |\n| --- | --- | --- | --- |\n";
  for (std::size_t i = 0; i < rep.models.size(); ++i)
    md += "| " + rep.models[i] + " | " + fmt4(rep.per_model[i].win_pct) +
          " | " + fmt4(rep.per_model[i].mean_error) + " | " +
          fmt4(rep.per_model[i].std_error) + " |\n";

  std::vector<std::string> written;
  written.push_back(out_path(args.out, "robustness.csv"));
  write_text(written.back(), csv);
  written.push_back(out_path(args.out, "robustness.md"));
  write_text(written.back(), md);
  write_manifest_for(args.out, "robustness", {args.results}, seed, written);
  note_outputs(written);
}

// ---------------------------------------------------------------------------
// Efficiency-weighted leaderboard
// ---------------------------------------------------------------------------

struct XiArgs : ResultsArgs {
  std::string efficiency;
  std::string baseline;
  std::vector<std::string> phi;
  double weight = 0.07;
  std::vector<std::string> exclude_datasets;
};

void run_xi(const XiArgs &args) {
  const auto table = load_table(args);
  const auto eff = ba::ingest_efficiency(args.efficiency);

  std::vector<ba::EfficiencyKind> kinds;
  for (const auto &p : args.phi) {
    const auto kind = ba::parse_efficiency_kind(p);
    if (std::find(kinds.begin(), kinds.end(), kind) != kinds.end())
      throw ba::ValidationError(ba::ValidationKind::BadArgument,
                                "duplicate efficiency kind '" + p + "'");
    kinds.push_back(kind);
  }

  ba::XiSpec spec;
  spec.baseline = args.baseline.empty()
                      ? ba::select_baseline(eff, table.models, kinds)
                      : args.baseline;
  spec.phi_set = kinds;
  spec.weight = args.weight;
  spec.error_metric = ba::parse_metric(args.metric);
  const std::set<std::string> exclude(args.exclude_datasets.begin(),
                                      args.exclude_datasets.end());
  const auto rep = ba::xi_leaderboard(table, eff, spec, exclude);

  std::string csv = "model,xi\n";
  for (std::size_t i = 0; i < rep.models.size(); ++i)
    csv += rep.models[i] + "," + fmt(rep.per_model[i]) + "\n";

  std::string md = "# Efficiency-weighted leaderboard (" + args.metric +
                   ", w = " + fmt(args.weight) + ")\n\n";
  md += "Baseline: " + spec.baseline + " (xi = 1 by construction). Factors:";
  for (const auto &p : args.phi) md += " " + p;
  md += ". Values above 1 beat the baseline after the efficiency penalty.\n\n";
  if (!exclude.empty()) {
    md += "Excluded datasets:";
    for (const auto &d : exclude) md += " " + d;
    md += ".\n\n";
  }
  md += "| Model | xi |\n| --- | --- |\n";
  for (std::size_t i = 0; i < rep.models.size(); ++i)
    md += "| " + rep.models[i] + " | " + fmt4(rep.per_model[i]) + " |\n";

  std::vector<std::string> written;
  written.push_back(out_path(args.out, "xi.csv"));
  write_text(written.back(), csv);
  written.push_back(out_path(args.out, "xi.md"));
  write_text(written.back(), md);
  write_manifest_for(args.out, "xi", {args.results, args.efficiency},
                     std::nullopt, written);
  note_outputs(written);
}

// ---------------------------------------------------------------------------
// Series characterization and the carry-forward baseline
// ---------------------------------------------------------------------------

struct SeriesArgs {
  std::string data;
  std::string timestamp = "auto";
  std::string missing = "reject";
  std::size_t stride = 1;
  std::string out = ".";
};

void add_series_flags(CLI::App *sub, SeriesArgs &args) {
  sub->add_option("--data", args.data,
                  "Wide CSV: one column per channel, optional leading "
                  "timestamp column")
      ->required();
  sub->add_option("--timestamp", args.timestamp,
                  "Leading timestamp column handling")
      ->check(CLI::IsMember({"auto", "yes", "no"}))
      ->capture_default_str();
  sub->add_option("--missing", args.missing, "Missing-value policy")
      ->check(CLI::IsMember({"reject", "ffill"}))
      ->capture_default_str();
  sub->add_option("--stride", args.stride, "Keep every n-th row")
      ->capture_default_str();
  sub->add_option("--out", args.out, "Output directory")
      ->capture_default_str();
}

ba::SeriesMatrix load_series(const SeriesArgs &args) {
  ba::SeriesIngestOptions opts;
  opts.timestamp = args.timestamp == "yes"  ? ba::TimestampColumn::YES
                   : args.timestamp == "no" ? ba::TimestampColumn::NO
                                            : ba::TimestampColumn::AUTO;
  opts.missing = args.missing == "ffill" ? ba::MissingPolicy::FORWARD_FILL
                                         : ba::MissingPolicy::REJECT;
  opts.stride = args.stride;
  return ba::ingest_series(args.data, opts);
}

std::string channel_label(const ba::SeriesMatrix &series, std::size_t c) {
  return c < series.channel_names.size() ? series.channel_names[c]
                                         : "channel_" + std::to_string(c);
}

struct CharacterizeArgs : SeriesArgs {
  std::size_t bins = 64;
  std::size_t sampen_m = 2;
  double sampen_r = 0.2;
  long adf_lags = -1;
  std::size_t k_max = 10;
  bool per_channel = false;
};

void run_characterize(const CharacterizeArgs &args) {
  const auto series = load_series(args);
  ba::FeatureOptions opts;
  opts.shannon_bins = args.bins;
  opts.sampen_m = args.sampen_m;
  opts.sampen_r = args.sampen_r;
  if (args.adf_lags >= 0)
    opts.adf_lags = static_cast<std::size_t>(args.adf_lags);
  opts.higuchi_k_max = args.k_max;
  opts.per_channel = args.per_channel;
  const auto rep = ba::characterize(series, opts);

  static const char *const feature_names[5] = {
      "shannon_entropy", "spectral_entropy", "sample_entropy", "adf_gamma",
      "higuchi_fd"};
  std::string csv = "feature,value\n";
  csv += "shannon_entropy," + fmt(rep.shannon_entropy) + "\n";
  csv += "spectral_entropy," + fmt(rep.spectral_entropy) + "\n";
  csv += "sample_entropy," + fmt(rep.sample_entropy) + "\n";
  csv += "adf_gamma," + fmt(rep.adf_gamma) + "\n";
  csv += "higuchi_fd," + fmt(rep.higuchi_fd) + "\n";
  csv += "pca_ev1," + fmt(rep.pca_ev1) + "\n";
  csv += std::string("sample_entropy_no_matches,") +
         (rep.sample_entropy_no_matches ? "1" : "0") + "\n";
  std::string dropped;
  for (auto c : rep.dropped_channels) {
    if (!dropped.empty()) dropped += ";";
    dropped += channel_label(series, c);
  }
  csv += "dropped_channels," + dropped + "\n";
  csv += "filled_cells," + std::to_string(series.filled_cells) + "\n";
  csv += "timesteps," + std::to_string(series.timesteps()) + "\n";
  csv += "channels," + std::to_string(series.channel_count()) + "\n";

  std::string md = "# Dataset characterization: " + series.name + "\n\n";
  md += std::to_string(series.timesteps()) + " timesteps, " +
        std::to_string(series.channel_count()) +
        " channels. Scalar features are channel means; the component share "
        "is matrix-level.\n\n";
  md += "| Feature | Value |\n| --- | --- |\n";
  md += "| Histogram entropy | " + fmt4(rep.shannon_entropy) + " |\n";
  md += "| Spectral entropy | " + fmt4(rep.spectral_entropy) + " |\n";
  md += "| Sample entropy | " + fmt(rep.sample_entropy) + " |\n";
  md += "| Unit-root coefficient | " + fmt4(rep.adf_gamma) + " |\n";
  md += "| Fractal dimension | " + fmt4(rep.higuchi_fd) + " |\n";
  md += "| First-component share | " + fmt4(rep.pca_ev1) + " |\n";
  if (rep.sample_entropy_no_matches)
    md += "\nNo template pair matched for at least one channel; the sample "
          "entropy is reported as infinite.\n";
  if (!dropped.empty())
    md += "\nZero-variance channels dropped from the component share: " +
          dropped + ".\n";

  std::vector<std::string> written;
  written.push_back(out_path(args.out, "characterize.csv"));
  write_text(written.back(), csv);
  if (args.per_channel) {
    std::string pc = "feature,channel,value\n";
    for (std::size_t f = 0; f < rep.per_channel.size(); ++f)
      for (std::size_t c = 0; c < rep.per_channel[f].size(); ++c)
        pc += std::string(feature_names[f]) + "," + channel_label(series, c) +
              "," + fmt(rep.per_channel[f][c]) + "\n";
    written.push_back(out_path(args.out, "characterize_channels.csv"));
    write_text(written.back(), pc);
  }
  written.push_back(out_path(args.out, "characterize.md"));
  write_text(written.back(), md);
  write_manifest_for(args.out, "characterize", {args.data}, std::nullopt,
                     written);
  note_outputs(written);
  // The no-match condition is a numerical failure at the process level,
  // reported after the artifacts are safely on disk.
  if (rep.sample_entropy_no_matches) {
    std::cerr << "numerical condition: no sample-entropy template match; "
                 "reported as infinity\n";
    g_exit_code = 3;
  }
}

struct LocfArgs : SeriesArgs {
  long horizon = 0;
};

void run_locf(const LocfArgs &args) {
  const auto series = load_series(args);
  const auto h = static_cast<std::size_t>(args.horizon);
  if (series.timesteps() <= h)
    throw ba::ValidationError(ba::ValidationKind::TooShort,
                              "horizon " + std::to_string(args.horizon) +
                                  " leaves no context in " +
                                  std::to_string(series.timesteps()) +
                                  " timesteps");
  std::string csv = "channel,mse,mae\n";
  double mse_sum = 0.0, mae_sum = 0.0;
  for (std::size_t c = 0; c < series.channel_count(); ++c) {
    const auto &chan = series.channels[c];
    const std::vector<double> context(chan.begin(), chan.end() - static_cast<long>(h));
    const std::vector<double> truth(chan.end() - static_cast<long>(h), chan.end());
    const auto m = ba::error_metrics(ba::locf_forecast(context, h), truth);
    mse_sum += m.mse;
    mae_sum += m.mae;
    csv += channel_label(series, c) + "," + fmt(m.mse) + "," + fmt(m.mae) + "\n";
  }
  const auto n = static_cast<double>(series.channel_count());
  csv += "all," + fmt(mse_sum / n) + "," + fmt(mae_sum / n) + "\n";

  std::string md = "# Carry-forward baseline: " + series.name + "\n\n";
  md += "Holding out the final " + std::to_string(args.horizon) +
        " timesteps and repeating the last observed value.\n\n";
  md += "Mean over channels: MSE " + fmt4(mse_sum / n) + ", MAE " +
        fmt4(mae_sum / n) + ".\n";

  std::vector<std::string> written;
  written.push_back(out_path(args.out, "locf.csv"));
  write_text(written.back(), csv);
  written.push_back(out_path(args.out, "locf.md"));
  write_text(written.back(), md);
  write_manifest_for(args.out, "locf", {args.data}, std::nullopt, written);
  note_outputs(written);
}

// ---------------------------------------------------------------------------
// Radar figures
// ---------------------------------------------------------------------------

struct RadarArgs : ResultsArgs {
  std::string mode = "both";
};

void run_radar(const RadarArgs &args) {
  const auto table = load_table(args);
  std::vector<std::string> written;
  if (args.mode == "absolute" || args.mode == "both") {
    written.push_back(out_path(args.out, "radar_absolute.svg"));
    ba::emit_svg(ba::build_radar(table, ba::RadarMode::ABSOLUTE),
                 written.back());
  }
  if (args.mode == "relative" || args.mode == "both") {
    written.push_back(out_path(args.out, "radar_relative.svg"));
    ba::emit_svg(ba::build_radar(table, ba::RadarMode::RELATIVE),
                 written.back());
  }
  write_manifest_for(args.out, "radar", {args.results}, std::nullopt, written);
  note_outputs(written);
}

// ---------------------------------------------------------------------------
// report --all
// ---------------------------------------------------------------------------

struct BundleArgs {
  bool all = false;
  ResultsArgs results_args;
  RobustArgs robust_args;
  XiArgs xi_args;
};

void run_bundle(BundleArgs &args, bool seeded) {
  if (!args.all)
    throw ba::ValidationError(ba::ValidationKind::BadArgument,
                              "report requires --all");
  run_rank(args.results_args);
  run_friedman(args.results_args);
  run_robustness(args.robust_args, seeded);
  run_xi(args.xi_args);
}

} // namespace

int main(int argc, char **argv) {
  g_command_line = join_command(argc, argv);

  CLI::App app{"Audit toolkit for long-horizon forecasting benchmarks: "
               "ranks, significance tests, subset-robustness, "
               "efficiency-weighted scores, dataset characterization, and "
               "radar figures. Exit codes: 0 ok, 2 validation, 3 numerical."};
  app.set_version_flag("--version", BENCHAUDIT_VERSION);
  app.require_subcommand(1);

  ResultsArgs rank_args;
  auto *rank_cmd =
      app.add_subcommand("rank", "Aggregate results and rank models");
  add_results_flags(rank_cmd, rank_args);
  rank_cmd->callback([&] { run_rank(rank_args); });

  ResultsArgs friedman_args;
  auto *friedman_cmd = app.add_subcommand(
      "friedman", "Friedman test over per-dataset model ranks");
  add_results_flags(friedman_cmd, friedman_args);
  friedman_cmd->callback([&] { run_friedman(friedman_args); });

  SignArgs sign_args;
  auto *sign_cmd =
      app.add_subcommand("signtest", "Exact paired sign test for two models");
  add_results_flags(sign_cmd, sign_args);
  sign_cmd->add_option("--a", sign_args.model_a, "First model")->required();
  sign_cmd->add_option("--b", sign_args.model_b, "Second model")->required();
  sign_cmd->callback([&] { run_signtest(sign_args); });

  RobustArgs robust_args;
  auto *robust_cmd = app.add_subcommand(
      "robustness", "Win distribution over sampled benchmark subsets");
  add_results_flags(robust_cmd, robust_args);
  robust_cmd->add_option("--samples", robust_args.samples,
                         "Sampled experimental configurations")
      ->capture_default_str();
  auto *seed_opt = robust_cmd->add_option(
      "--seed", robust_args.seed, "Master seed (required unless --ephemeral)");
  robust_cmd->add_flag("--ephemeral", robust_args.ephemeral,
                       "Draw a seed instead of requiring one");
  robust_cmd->add_option("--workers", robust_args.workers,
                         "Worker threads (0 = auto); results do not depend "
                         "on the worker count")
      ->capture_default_str();
  robust_cmd->add_option("--exclude-dataset", robust_args.exclude_datasets,
                         "Drop a dataset before sampling (repeatable)");
  robust_cmd->add_option("--exclude-model", robust_args.exclude_models,
                         "Drop a model before sampling (repeatable)");
  robust_cmd->add_option("--exclude-horizon", robust_args.exclude_horizons,
                         "Drop a horizon before sampling (repeatable)");
  robust_cmd->callback(
      [&] { run_robustness(robust_args, seed_opt->count() > 0); });

  XiArgs xi_args;
  auto *xi_cmd = app.add_subcommand(
      "xi", "Efficiency-weighted error ratio against a baseline");
  add_results_flags(xi_cmd, xi_args);
  xi_cmd->add_option("--efficiency", xi_args.efficiency,
                     "Efficiency CSV: model,kind,value")
      ->required();
  xi_cmd->add_option("--baseline", xi_args.baseline,
                     "Baseline model (default: the model at least as "
                     "efficient as every other on every factor)");
  xi_cmd->add_option("--phi", xi_args.phi,
                     "Efficiency factor, e.g. PARAMS, FLOPS, TRAIN_MEMORY, "
                     "TEST_MEMORY, TRAIN_THROUGHPUT, TEST_THROUGHPUT "
                     "(repeatable)")
      ->required()
      ->delimiter(',');
  xi_cmd->add_option("--weight", xi_args.weight, "Efficiency weight")
      ->capture_default_str();
  xi_cmd->add_option("--exclude-dataset", xi_args.exclude_datasets,
                     "Drop a dataset from the error average (repeatable)");
  xi_cmd->callback([&] { run_xi(xi_args); });

  CharacterizeArgs char_args;
  auto *char_cmd = app.add_subcommand(
      "characterize", "Entropy, stationarity, and dimensionality features");
  add_series_flags(char_cmd, char_args);
  char_cmd->add_option("--bins", char_args.bins, "Histogram bins")
      ->capture_default_str();
  char_cmd->add_option("--sampen-m", char_args.sampen_m,
                       "Sample-entropy template length")
      ->capture_default_str();
  char_cmd->add_option("--sampen-r", char_args.sampen_r,
                       "Sample-entropy tolerance on the z-scored series")
      ->capture_default_str();
  char_cmd->add_option("--adf-lags", char_args.adf_lags,
                       "Lagged differences (default: floor(12 (T/100)^0.25))");
  char_cmd->add_option("--kmax", char_args.k_max, "Largest curve-length scale")
      ->capture_default_str();
  char_cmd->add_flag("--per-channel", char_args.per_channel,
                     "Also write per-channel feature values");
  char_cmd->callback([&] { run_characterize(char_args); });

  LocfArgs locf_args;
  auto *locf_cmd = app.add_subcommand(
      "locf", "Score the repeat-last-value baseline on a held-out tail");
  add_series_flags(locf_cmd, locf_args);
  locf_cmd->add_option("--horizon", locf_args.horizon, "Held-out tail length")
      ->required()
      ->check(CLI::PositiveNumber);
  locf_cmd->callback([&] { run_locf(locf_args); });

  RadarArgs radar_args;
  auto *radar_cmd = app.add_subcommand(
      "radar", "Radar figures in absolute and relative scales");
  add_results_flags(radar_cmd, radar_args);
  radar_cmd->add_option("--mode", radar_args.mode, "Which scales to emit")
      ->check(CLI::IsMember({"absolute", "relative", "both"}))
      ->capture_default_str();
  radar_cmd->callback([&] { run_radar(radar_args); });

  BundleArgs bundle_args;
  auto *report_cmd = app.add_subcommand(
      "report", "Chain rank, friedman, robustness, and xi into one bundle");
  report_cmd->add_flag("--all", bundle_args.all, "Run the full chain");
  add_results_flags(report_cmd, bundle_args.results_args);
  report_cmd->add_option("--efficiency", bundle_args.xi_args.efficiency,
                         "Efficiency CSV: model,kind,value")
      ->required();
  report_cmd->add_option("--samples", bundle_args.robust_args.samples,
                         "Sampled configurations for the robustness stage")
      ->capture_default_str();
  auto *bundle_seed = report_cmd->add_option(
      "--seed", bundle_args.robust_args.seed,
      "Master seed (required unless --ephemeral)");
  report_cmd->add_flag("--ephemeral", bundle_args.robust_args.ephemeral,
                       "Draw a seed instead of requiring one");
  report_cmd->add_option("--workers", bundle_args.robust_args.workers,
                         "Worker threads for the robustness stage (0 = auto)")
      ->capture_default_str();
  report_cmd->add_option("--baseline", bundle_args.xi_args.baseline,
                         "Baseline model for the xi stage");
  report_cmd->add_option("--phi", bundle_args.xi_args.phi,
                         "Efficiency factors for the xi stage")
      ->delimiter(',');
  report_cmd->add_option("--weight", bundle_args.xi_args.weight,
                         "Efficiency weight for the xi stage")
      ->capture_default_str();
  report_cmd->callback([&] {
    // The stage argument structs share the flags the user actually set.
    static_cast<ResultsArgs &>(bundle_args.robust_args) =
        bundle_args.results_args;
    static_cast<ResultsArgs &>(bundle_args.xi_args) = bundle_args.results_args;
    if (bundle_args.xi_args.phi.empty())
      bundle_args.xi_args.phi = {"PARAMS"};
    run_bundle(bundle_args, bundle_seed->count() > 0);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  } catch (const ba::ValidationError &e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ba::NumericalError &e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return g_exit_code;
}
