#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include "benchaudit/core.hpp"

using namespace benchaudit;

namespace {

// Writes content to a fresh temp file and returns its path.
std::string temp_csv(const std::string &content) {
  static int counter = 0;
  auto path = std::filesystem::temp_directory_path() /
              ("benchaudit_core_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++) + ".csv");
  std::ofstream out(path);
  out << content;
  return path.string();
}

template <typename F> ValidationKind thrown_kind(F &&f) {
  try {
    f();
  } catch (const ValidationError &e) {
    return e.kind();
  }
  FAIL("expected a ValidationError");
  return ValidationKind::IoFailure;
}

} // namespace

TEST_CASE("metric enumeration round-trips") {
  REQUIRE(parse_metric("MSE") == ErrorMetricKind::MSE);
  REQUIRE(parse_metric("MAE") == ErrorMetricKind::MAE);
  REQUIRE(format_metric(parse_metric("MSE")) == "MSE");
  REQUIRE(format_metric(parse_metric("MAE")) == "MAE");
  REQUIRE_THROWS_AS(parse_metric("RMSE"), ValidationError);
}

TEST_CASE("efficiency kinds carry fixed directions") {
  REQUIRE(direction(EfficiencyKind::FLOPS) == Direction::LOWER_BETTER);
  REQUIRE(direction(EfficiencyKind::PARAMS) == Direction::LOWER_BETTER);
  REQUIRE(direction(EfficiencyKind::TRAIN_MEMORY) == Direction::LOWER_BETTER);
  REQUIRE(direction(EfficiencyKind::TEST_MEMORY) == Direction::LOWER_BETTER);
  REQUIRE(direction(EfficiencyKind::TRAIN_THROUGHPUT) == Direction::HIGHER_BETTER);
  REQUIRE(direction(EfficiencyKind::TEST_THROUGHPUT) == Direction::HIGHER_BETTER);

  // Parse is case-insensitive, format round-trips.
  for (auto k : {EfficiencyKind::FLOPS, EfficiencyKind::PARAMS,
                 EfficiencyKind::TRAIN_THROUGHPUT, EfficiencyKind::TRAIN_MEMORY,
                 EfficiencyKind::TEST_THROUGHPUT, EfficiencyKind::TEST_MEMORY}) {
    REQUIRE(parse_efficiency_kind(format_efficiency_kind(k)) == k);
  }
  REQUIRE(parse_efficiency_kind("params") == EfficiencyKind::PARAMS);
  REQUIRE(parse_efficiency_kind("Train_Throughput") ==
          EfficiencyKind::TRAIN_THROUGHPUT);
}

TEST_CASE("ingest_results parses a minimal file") {
  auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                       "PatchTST,ETTh1,96,0,MSE,0.380\n");
  auto cube = ingest_results(path);
  REQUIRE(cube.records().size() == 1);
  const auto &r = cube.records().front();
  REQUIRE(r.model == "PatchTST");
  REQUIRE(r.dataset == "ETTh1");
  REQUIRE(r.horizon == 96);
  REQUIRE(r.seed == 0);
  REQUIRE(r.metric == ErrorMetricKind::MSE);
  REQUIRE(r.value == 0.380);
}

TEST_CASE("ingest_results error paths") {
  SECTION("header only is an empty cube") {
    auto path = temp_csv("model,dataset,horizon,seed,metric,value\n");
    REQUIRE(thrown_kind([&] { ingest_results(path); }) ==
            ValidationKind::EmptyCube);
  }
  SECTION("duplicate key names the offending row") {
    auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                         "A,D,96,0,MSE,0.1\n"
                         "A,D,96,0,MSE,0.2\n");
    try {
      ingest_results(path);
      FAIL("expected DuplicateKey");
    } catch (const ValidationError &e) {
      REQUIRE(e.kind() == ValidationKind::DuplicateKey);
      REQUIRE(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }
  SECTION("missing required column") {
    auto path = temp_csv("model,dataset,metric,value\nA,D,MSE,0.1\n");
    REQUIRE(thrown_kind([&] { ingest_results(path); }) ==
            ValidationKind::MissingColumn);
  }
  SECTION("NaN and Inf tokens are rejected") {
    for (const char *bad : {"nan", "NaN", "inf", "Infinity", "-inf"}) {
      auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                           "A,D,96,0,MSE," + std::string(bad) + "\n");
      REQUIRE(thrown_kind([&] { ingest_results(path); }) ==
              ValidationKind::NonNumericValue);
    }
  }
  SECTION("scientific notation is accepted") {
    auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                         "A,D,96,0,MSE,3.8e-1\n");
    REQUIRE(ingest_results(path).records().front().value == 0.38);
  }
  SECTION("negative error value") {
    auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                         "A,D,96,0,MSE,-0.1\n");
    REQUIRE(thrown_kind([&] { ingest_results(path); }) ==
            ValidationKind::NegativeError);
  }
  SECTION("non-positive horizon") {
    auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                         "A,D,0,0,MSE,0.1\n");
    REQUIRE(thrown_kind([&] { ingest_results(path); }) ==
            ValidationKind::OutOfRange);
  }
  SECTION("field-count mismatch names the row") {
    auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                         "A,D,96,0,MSE\n");
    REQUIRE_THROWS_AS(ingest_results(path), ValidationError);
  }
  SECTION("unknown metric") {
    auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                         "A,D,96,0,RMSE,0.1\n");
    REQUIRE(thrown_kind([&] { ingest_results(path); }) ==
            ValidationKind::BadArgument);
  }
}

TEST_CASE("missing seed column defaults every record to seed 0") {
  auto path = temp_csv("model,dataset,horizon,metric,value\n"
                       "A,D,96,MSE,0.1\n"
                       "B,D,96,MSE,0.2\n");
  auto cube = ingest_results(path);
  for (const auto &r : cube.records()) REQUIRE(r.seed == 0);
}

TEST_CASE("identifiers are byte-exact and case-sensitive") {
  auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                       "A,ETTh1,96,0,MSE,0.1\n"
                       "A,etth1,96,0,MSE,0.2\n");
  auto cube = ingest_results(path); // not a duplicate: different datasets
  REQUIRE(cube.datasets().size() == 2);
}

TEST_CASE("index lists are first-seen ingestion order") {
  auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                       "B,D2,192,0,MSE,0.1\n"
                       "A,D1,96,0,MSE,0.2\n"
                       "B,D1,96,0,MSE,0.3\n");
  auto cube = ingest_results(path);
  REQUIRE(cube.models() == std::vector<std::string>{"B", "A"});
  REQUIRE(cube.datasets() == std::vector<std::string>{"D2", "D1"});
  REQUIRE(cube.horizons() == std::vector<long>{192, 96});
}

TEST_CASE("index lists match the distinct keys of the record set") {
  auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                       "A,D1,96,0,MSE,0.1\n"
                       "A,D1,96,0,MAE,0.2\n"
                       "B,D2,192,1,MSE,0.3\n"
                       "A,D2,96,0,MSE,0.4\n");
  auto cube = ingest_results(path);
  std::set<std::string> models, datasets;
  std::set<long> horizons;
  for (const auto &r : cube.records()) {
    models.insert(r.model);
    datasets.insert(r.dataset);
    horizons.insert(r.horizon);
  }
  REQUIRE(models == std::set<std::string>(cube.models().begin(),
                                          cube.models().end()));
  REQUIRE(datasets == std::set<std::string>(cube.datasets().begin(),
                                            cube.datasets().end()));
  REQUIRE(horizons ==
          std::set<long>(cube.horizons().begin(), cube.horizons().end()));
}

TEST_CASE("ingest -> serialize -> ingest is the identity on the record set") {
  auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                       "A,D1,96,0,MSE,0.123456789012345\n"
                       "A,D1,96,1,MSE,3.8e-05\n"
                       "B,D1,720,0,MAE,0.5\n"
                       "B,D2,96,0,MSE,1e2\n");
  auto cube = ingest_results(path);
  auto out = temp_csv("");
  write_results(cube, out);
  auto cube2 = ingest_results(out);

  using Row = std::tuple<std::string, std::string, long, long, int, double>;
  auto rows = [](const ResultsCube &c) {
    std::set<Row> s;
    for (const auto &r : c.records())
      s.insert({r.model, r.dataset, r.horizon, r.seed,
                static_cast<int>(r.metric), r.value});
    return s;
  };
  REQUIRE(rows(cube) == rows(cube2));
}

TEST_CASE("filtered drops named models, datasets, horizons") {
  auto path = temp_csv("model,dataset,horizon,seed,metric,value\n"
                       "A,D1,96,0,MSE,0.1\n"
                       "B,D1,96,0,MSE,0.2\n"
                       "A,D2,96,0,MSE,0.3\n"
                       "A,D1,192,0,MSE,0.4\n");
  auto cube = ingest_results(path);
  auto f = cube.filtered({"B"}, {"D2"}, {192});
  REQUIRE(f.records().size() == 1);
  REQUIRE(f.models() == std::vector<std::string>{"A"});
  REQUIRE(f.datasets() == std::vector<std::string>{"D1"});
  REQUIRE(thrown_kind([&] { cube.filtered({"A", "B"}, {}, {}); }) ==
          ValidationKind::EmptyCube);
}

TEST_CASE("ingest_efficiency attaches directions and validates") {
  auto path = temp_csv("model,kind,value\n"
                       "DLinear,PARAMS,0.37\n"
                       "DLinear,TRAIN_THROUGHPUT,1663.58\n");
  auto table = ingest_efficiency(path);
  REQUIRE(table.records().size() == 2);
  REQUIRE(direction(table.records()[0].kind) == Direction::LOWER_BETTER);
  REQUIRE(direction(table.records()[1].kind) == Direction::HIGHER_BETTER);
  REQUIRE(table.value("DLinear", EfficiencyKind::PARAMS) == 0.37);

  SECTION("zero value is rejected") {
    auto bad = temp_csv("model,kind,value\nX,PARAMS,0\n");
    REQUIRE(thrown_kind([&] { ingest_efficiency(bad); }) ==
            ValidationKind::NonPositiveValue);
  }
  SECTION("unknown kind is rejected") {
    auto bad = temp_csv("model,kind,value\nX,WATTS,3\n");
    REQUIRE(thrown_kind([&] { ingest_efficiency(bad); }) ==
            ValidationKind::UnknownEfficiencyKind);
  }
}

TEST_CASE("per-setting efficiency entries average into one value") {
  auto path = temp_csv("model,kind,value,dataset,horizon\n"
                       "A,FLOPS,1.0,ETTh1,96\n"
                       "A,FLOPS,3.0,ETTh1,192\n"
                       "A,FLOPS,5.0,Weather,96\n");
  auto table = ingest_efficiency(path);
  REQUIRE(table.value("A", EfficiencyKind::FLOPS) == 3.0);
  REQUIRE_THROWS_AS(table.value("A", EfficiencyKind::PARAMS), ValidationError);
}
