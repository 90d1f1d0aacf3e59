#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "benchaudit/core.hpp"
#include "benchaudit/rng.hpp"
#include "benchaudit/robustness.hpp"

using namespace benchaudit;
using Catch::Matchers::WithinAbs;

namespace {

// Oracle: exact win probabilities and expected scores under the two-stage
// sampling law, by enumerating every (dataset subset, horizon subset) pair
// with weight (1/M) C(M,|S_D|)^-1 (1/H) C(H,|S_T|)^-1.
struct ExactLaw {
  std::vector<double> win_prob;   // per model
  std::vector<double> mean_score; // per model
};

double choose(unsigned n, unsigned k) {
  double c = 1.0;
  for (unsigned i = 0; i < k; ++i)
    c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return c;
}

ExactLaw enumerate_law(const std::vector<std::vector<double>> &cells,
                       std::size_t n_d, std::size_t n_h) {
  const std::size_t n_models = cells.size();
  ExactLaw law{std::vector<double>(n_models, 0.0),
               std::vector<double>(n_models, 0.0)};
  for (unsigned dm = 1; dm < (1u << n_d); ++dm) {
    const unsigned kd = static_cast<unsigned>(__builtin_popcount(dm));
    for (unsigned hm = 1; hm < (1u << n_h); ++hm) {
      const unsigned kh = static_cast<unsigned>(__builtin_popcount(hm));
      const double weight =
          1.0 / (static_cast<double>(n_d) * choose(n_d, kd) *
                 static_cast<double>(n_h) * choose(n_h, kh));
      std::vector<double> score(n_models, 0.0);
      for (std::size_t mi = 0; mi < n_models; ++mi) {
        double sum = 0.0;
        for (std::size_t di = 0; di < n_d; ++di)
          for (std::size_t hi = 0; hi < n_h; ++hi)
            if ((dm >> di & 1u) && (hm >> hi & 1u))
              sum += cells[mi][di * n_h + hi];
        score[mi] = sum / static_cast<double>(kd * kh);
      }
      const double best = *std::min_element(score.begin(), score.end());
      const auto winners = std::count(score.begin(), score.end(), best);
      for (std::size_t mi = 0; mi < n_models; ++mi) {
        if (score[mi] == best)
          law.win_prob[mi] += weight / static_cast<double>(winners);
        law.mean_score[mi] += weight * score[mi];
      }
    }
  }
  return law;
}

// Builds a seed-collapsed cube with cells[model][dataset * H + horizon].
ResultsCube cube_from_cells(const std::vector<std::vector<double>> &cells,
                            std::size_t n_d, std::size_t n_h) {
  ResultsCube cube;
  for (std::size_t mi = 0; mi < cells.size(); ++mi)
    for (std::size_t di = 0; di < n_d; ++di)
      for (std::size_t hi = 0; hi < n_h; ++hi)
        cube.add({"M" + std::to_string(mi), "D" + std::to_string(di),
                  static_cast<long>(96 * (hi + 1)), 0, ErrorMetricKind::MSE,
                  cells[mi][di * n_h + hi]});
  return cube;
}

RobustnessConfig config_for(std::size_t n_d, std::size_t n_h,
                            std::size_t k_samples, std::uint64_t seed) {
  RobustnessConfig cfg;
  cfg.k_samples = k_samples;
  cfg.master_seed = seed;
  for (std::size_t di = 0; di < n_d; ++di)
    cfg.dataset_pool.push_back("D" + std::to_string(di));
  for (std::size_t hi = 0; hi < n_h; ++hi)
    cfg.horizon_pool.push_back(static_cast<long>(96 * (hi + 1)));
  cfg.metric = ErrorMetricKind::MSE;
  return cfg;
}

} // namespace

TEST_CASE("splitmix64 reproduces the published reference stream") {
  // First outputs for seeds 0 and 1234567 from the reference implementation.
  REQUIRE(splitmix64_at(0, 0) == 16294208416658607535ULL);
  REQUIRE(splitmix64_at(0, 1) == 7960286522194355700ULL);
  REQUIRE(splitmix64_at(0, 2) == 487617019471545679ULL);
  REQUIRE(splitmix64_at(1234567, 0) == 6457827717110365317ULL);
  REQUIRE(splitmix64_at(1234567, 1) == 3203168211198807973ULL);
  REQUIRE(splitmix64_at(1234567, 2) == 9817491932198370423ULL);
  REQUIRE(splitmix64_at(1234567, 3) == 4593380528125082431ULL);
  REQUIRE(substream_seed(1234567, 0) == 6457827717110365317ULL);
}

TEST_CASE("xoshiro256++ stream is frozen") {
  Xoshiro256pp rng(42);
  REQUIRE(rng.next() == 15021278609987233951ULL);
  REQUIRE(rng.next() == 5881210131331364753ULL);
  REQUIRE(rng.next() == 18149643915985481100ULL);
  REQUIRE(rng.next() == 12933668939759105464ULL);
  REQUIRE(rng.next() == 14637574242682825331ULL);
}

TEST_CASE("bounded draws are in range and unbiased looking") {
  Xoshiro256pp rng(7);
  std::vector<std::size_t> counts(10, 0);
  for (int i = 0; i < 100000; ++i) ++counts[rng.below(10)];
  for (auto c : counts) {
    REQUIRE(c > 9500); // 10000 expected, sigma ~95
    REQUIRE(c < 10500);
  }
  for (int i = 0; i < 100; ++i) REQUIRE(rng.below(1) == 0);
  REQUIRE_THROWS_AS(rng.below(0), ValidationError);
}

TEST_CASE("sample_subset yields sorted uniform subsets") {
  Xoshiro256pp rng(3);
  SECTION("bounds, order, uniqueness") {
    for (int i = 0; i < 2000; ++i) {
      const std::size_t size = 1 + rng.below(6);
      auto s = sample_subset(rng, 6, size);
      REQUIRE(s.size() == size);
      for (std::size_t j = 1; j < s.size(); ++j) REQUIRE(s[j - 1] < s[j]);
      REQUIRE(s.back() < 6);
    }
  }
  SECTION("all size-2 subsets of 4 are equally likely") {
    std::map<std::pair<std::size_t, std::size_t>, int> freq;
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) {
      auto s = sample_subset(rng, 4, 2);
      ++freq[{s[0], s[1]}];
    }
    REQUIRE(freq.size() == 6);
    for (const auto &[pair, count] : freq) {
      // Expected 10000, sigma ~91; allow 5 sigma.
      REQUIRE(count > 9540);
      REQUIRE(count < 10460);
    }
  }
  SECTION("full-pool subset is the whole pool") {
    auto s = sample_subset(rng, 5, 5);
    REQUIRE(s == std::vector<std::size_t>{0, 1, 2, 3, 4});
  }
  SECTION("invalid sizes throw") {
    REQUIRE_THROWS_AS(sample_subset(rng, 5, 0), ValidationError);
    REQUIRE_THROWS_AS(sample_subset(rng, 5, 6), ValidationError);
  }
}

TEST_CASE("sample_configuration obeys the two-stage law") {
  SECTION("single dataset and horizon are forced") {
    Xoshiro256pp rng(9);
    for (int i = 0; i < 50; ++i) {
      const auto [d, h] = sample_configuration(rng, 1, 1);
      REQUIRE(d == std::vector<std::size_t>{0});
      REQUIRE(h == std::vector<std::size_t>{0});
    }
  }
  SECTION("each singleton of two datasets appears a quarter of the time") {
    const int draws = 100000;
    int singleton0 = 0;
    for (int i = 0; i < draws; ++i) {
      Xoshiro256pp rng(substream_seed(2024, static_cast<std::uint64_t>(i)));
      const auto [d, h] = sample_configuration(rng, 2, 1);
      if (d == std::vector<std::size_t>{0}) ++singleton0;
    }
    // p = 1/4; 3 sigma of p_hat is ~0.0041.
    REQUIRE_THAT(static_cast<double>(singleton0) / draws,
                 WithinAbs(0.25, 0.0045));
  }
  SECTION("sizes stay within bounds over many draws") {
    Xoshiro256pp rng(17);
    for (int i = 0; i < 10000; ++i) {
      const auto [d, h] = sample_configuration(rng, 14, 4);
      REQUIRE(d.size() >= 1);
      REQUIRE(d.size() <= 14);
      REQUIRE(h.size() >= 1);
      REQUIRE(h.size() <= 4);
    }
  }
}

TEST_CASE("monte carlo agrees with exhaustive enumeration") {
  const std::size_t K = 200000;
  // Three hand cubes: plain, engineered exact ties, near-dominant model.
  const std::vector<std::vector<std::vector<double>>> cases = {
      {{0.30, 0.50, 0.40, 0.45, 0.60, 0.20},
       {0.35, 0.45, 0.42, 0.40, 0.55, 0.25},
       {0.50, 0.30, 0.38, 0.52, 0.40, 0.30}},
      {{0.30, 0.50, 0.40, 0.45, 0.60, 0.20},
       {0.30, 0.50, 0.42, 0.40, 0.55, 0.25}, // ties model 0 on two cells
       {0.50, 0.30, 0.38, 0.52, 0.40, 0.30}},
      {{0.10, 0.10, 0.12, 0.11, 0.10, 0.10},
       {0.35, 0.45, 0.42, 0.40, 0.55, 0.25},
       {0.50, 0.09, 0.38, 0.52, 0.40, 0.30}}};
  std::uint64_t seed = 99;
  for (const auto &cells : cases) {
    const auto law = enumerate_law(cells, 3, 2);
    auto cube = cube_from_cells(cells, 3, 2);
    auto report = run_robustness(cube, config_for(3, 2, K, seed++));
    for (std::size_t mi = 0; mi < cells.size(); ++mi) {
      const double p = law.win_prob[mi];
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(K));
      INFO("model " << mi << " exact p=" << p);
      REQUIRE_THAT(report.per_model[mi].win_pct / 100.0,
                   WithinAbs(p, 3.0 * se + 1e-12));
      const double se_mean =
          report.per_model[mi].std_error / std::sqrt(static_cast<double>(K));
      REQUIRE_THAT(report.per_model[mi].mean_error,
                   WithinAbs(law.mean_score[mi], 3.0 * se_mean + 1e-12));
    }
    double total = 0.0;
    for (const auto &m : report.per_model) total += m.win_pct;
    REQUIRE_THAT(total, WithinAbs(100.0, 1e-9));
  }
}

TEST_CASE("a single model always wins and averages its own cells") {
  SECTION("one cell: exact for a dyadic value") {
    ResultsCube cube;
    cube.add({"only", "D", 96, 0, ErrorMetricKind::MSE, 0.5});
    RobustnessConfig cfg;
    cfg.k_samples = 500;
    cfg.master_seed = 5;
    cfg.dataset_pool = {"D"};
    cfg.horizon_pool = {96};
    auto rep = run_robustness(cube, cfg);
    REQUIRE(rep.per_model[0].win_pct == 100.0);
    REQUIRE(rep.per_model[0].mean_error == 0.5);
    REQUIRE(rep.per_model[0].std_error == 0.0);
  }
  SECTION("one cell: accumulation-rounding close for a non-dyadic value") {
    ResultsCube cube;
    cube.add({"only", "D", 96, 0, ErrorMetricKind::MSE, 0.42});
    RobustnessConfig cfg;
    cfg.k_samples = 500;
    cfg.master_seed = 5;
    cfg.dataset_pool = {"D"};
    cfg.horizon_pool = {96};
    auto rep = run_robustness(cube, cfg);
    REQUIRE(rep.per_model[0].win_pct == 100.0);
    REQUIRE_THAT(rep.per_model[0].mean_error, WithinAbs(0.42, 1e-12));
    REQUIRE_THAT(rep.per_model[0].std_error, WithinAbs(0.0, 1e-12));
  }
  SECTION("many cells: mean of score distribution near grand mean") {
    std::vector<std::vector<double>> cells = {
        {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
    auto cube = cube_from_cells(cells, 3, 2);
    auto rep = run_robustness(cube, config_for(3, 2, 100000, 1));
    REQUIRE(rep.per_model[0].win_pct == 100.0);
    REQUIRE_THAT(rep.per_model[0].mean_error, WithinAbs(0.35, 0.01));
  }
}

TEST_CASE("strictly dominated entrants leave every other model untouched") {
  std::vector<std::vector<double>> cells = {
      {0.30, 0.50, 0.40, 0.45, 0.60, 0.20},
      {0.35, 0.45, 0.42, 0.40, 0.55, 0.25}};
  auto base_cube = cube_from_cells(cells, 3, 2);
  auto dominated = cells;
  dominated.push_back({0.99, 0.99, 0.99, 0.99, 0.99, 0.99});
  auto wide_cube = cube_from_cells(dominated, 3, 2);

  auto cfg = config_for(3, 2, 20000, 77);
  auto base = run_robustness(base_cube, cfg);
  auto wide = run_robustness(wide_cube, cfg);
  REQUIRE(wide.per_model[2].win_pct == 0.0);
  for (std::size_t mi = 0; mi < 2; ++mi) {
    REQUIRE(base.per_model[mi].win_pct == wide.per_model[mi].win_pct);
    REQUIRE(base.per_model[mi].mean_error == wide.per_model[mi].mean_error);
    REQUIRE(base.per_model[mi].std_error == wide.per_model[mi].std_error);
  }
}

TEST_CASE("reports are bit-identical across worker counts and reruns") {
  std::vector<std::vector<double>> cells = {
      {0.30, 0.50, 0.40, 0.45, 0.60, 0.20},
      {0.35, 0.45, 0.42, 0.40, 0.55, 0.25},
      {0.50, 0.30, 0.38, 0.52, 0.40, 0.30}};
  auto cube = cube_from_cells(cells, 3, 2);
  auto cfg = config_for(3, 2, 9973, 31415);
  auto reference = run_robustness(cube, cfg, 1);
  for (unsigned workers : {2u, 3u, 5u, 8u, 16u}) {
    auto rep = run_robustness(cube, cfg, workers);
    for (std::size_t mi = 0; mi < cells.size(); ++mi) {
      REQUIRE(rep.per_model[mi].win_pct == reference.per_model[mi].win_pct);
      REQUIRE(rep.per_model[mi].mean_error ==
              reference.per_model[mi].mean_error);
      REQUIRE(rep.per_model[mi].std_error == reference.per_model[mi].std_error);
    }
  }
  SECTION("a different master seed moves the estimate") {
    auto other_cfg = cfg;
    other_cfg.master_seed = 271828;
    auto rep = run_robustness(cube, other_cfg);
    bool any_difference = false;
    for (std::size_t mi = 0; mi < cells.size(); ++mi)
      any_difference |= rep.per_model[mi].mean_error !=
                        reference.per_model[mi].mean_error;
    REQUIRE(any_difference);
  }
}

TEST_CASE("robustness validation errors") {
  std::vector<std::vector<double>> cells = {{0.1, 0.2}};
  auto cube = cube_from_cells(cells, 1, 2);
  SECTION("empty pools") {
    RobustnessConfig cfg;
    cfg.horizon_pool = {96};
    REQUIRE_THROWS_AS(run_robustness(cube, cfg), ValidationError);
  }
  SECTION("zero samples") {
    auto cfg = config_for(1, 2, 1, 0);
    cfg.k_samples = 0;
    REQUIRE_THROWS_AS(run_robustness(cube, cfg), ValidationError);
  }
  SECTION("duplicate pool entries") {
    auto cfg = config_for(1, 2, 10, 0);
    cfg.dataset_pool.push_back("D0");
    REQUIRE_THROWS_AS(run_robustness(cube, cfg), ValidationError);
  }
  SECTION("missing cell surfaces as an incomplete cube") {
    auto cfg = config_for(1, 2, 10, 0);
    cfg.dataset_pool.push_back("unheard-of");
    try {
      run_robustness(cube, cfg);
      FAIL("expected IncompleteCube");
    } catch (const ValidationError &e) {
      REQUIRE(e.kind() == ValidationKind::IncompleteCube);
    }
  }
  SECTION("uncollapsed seeds are rejected") {
    ResultsCube multi;
    multi.add({"A", "D0", 96, 0, ErrorMetricKind::MSE, 0.1});
    multi.add({"A", "D0", 96, 1, ErrorMetricKind::MSE, 0.2});
    RobustnessConfig cfg;
    cfg.dataset_pool = {"D0"};
    cfg.horizon_pool = {96};
    cfg.k_samples = 10;
    REQUIRE_THROWS_AS(run_robustness(multi, cfg), ValidationError);
  }
}

TEST_CASE("benchmark fixture reproduces the published churn figures") {
  auto cube =
      ingest_results(std::string(FIXTURE_DIR) + "/results_mean_8model.csv");
  RobustnessConfig cfg;
  cfg.k_samples = 5000;
  cfg.master_seed = 20240817;
  cfg.dataset_pool = cube.datasets();
  cfg.horizon_pool = cube.horizons();
  cfg.metric = ErrorMetricKind::MSE;

  auto rep = run_robustness(cube, cfg);
  auto stats_of = [&](const RobustnessReport &r, const std::string &model) {
    auto it = std::find(r.models.begin(), r.models.end(), model);
    REQUIRE(it != r.models.end());
    return r.per_model[static_cast<std::size_t>(it - r.models.begin())];
  };
  const auto smamba = stats_of(rep, "S-Mamba");
  REQUIRE_THAT(smamba.win_pct, WithinAbs(55.7, 3.0));
  REQUIRE_THAT(smamba.mean_error, WithinAbs(0.49, 0.02));
  REQUIRE_THAT(smamba.std_error, WithinAbs(0.16, 0.03));

  // Dropping one dataset flips the apparent champion.
  RobustnessConfig without = cfg;
  without.dataset_pool.clear();
  for (const auto &d : cube.datasets())
    if (d != "MotorImagery") without.dataset_pool.push_back(d);
  auto rep2 = run_robustness(cube.filtered({}, {"MotorImagery"}, {}), without);
  const auto patch = stats_of(rep2, "PatchTST");
  REQUIRE_THAT(patch.win_pct, WithinAbs(46.8, 3.0));
  REQUIRE_THAT(patch.mean_error, WithinAbs(0.45, 0.02));
}
