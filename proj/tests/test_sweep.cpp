// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "earlybo/sweep.hpp"
#include "fixtures.hpp"

using namespace earlybo;

TEST_CASE("saturation point on the published averages") {
  std::vector<std::pair<std::int64_t, double>> rows;
  for (const auto& row : fixtures::accuracy_by_size()) {
    rows.push_back({row.size, row.published_average});
  }

  SECTION("epsilon zero picks the first size reaching the maximum") {
    const auto [size, accuracy] = saturation_point(rows, 0.0);
    CHECK(size == 6500);
    CHECK(accuracy == Catch::Approx(0.939));
  }

  SECTION("a small tolerance still lands on the same size") {
    const auto [size, accuracy] = saturation_point(rows, 0.005);
    CHECK(size == 6500);
    CHECK(accuracy == Catch::Approx(0.939));
  }

  SECTION("row order does not matter") {
    std::mt19937 rng(4);
    for (int round = 0; round < 5; ++round) {
      std::shuffle(rows.begin(), rows.end(), rng);
      CHECK(saturation_point(rows, 0.0).first == 6500);
    }
  }

  SECTION("saturation size is monotone in the tolerance") {
    std::int64_t previous = std::numeric_limits<std::int64_t>::max();
    for (double epsilon : {0.0, 0.005, 0.02, 0.05, 0.2}) {
      const auto [size, accuracy] = saturation_point(rows, epsilon);
      CHECK(size <= previous);
      previous = size;
    }
  }
}

TEST_CASE("saturation point edge cases") {
  CHECK(saturation_point({{500, 0.8}}, 0.0) == std::pair<std::int64_t, double>{500, 0.8});
  CHECK_THROWS_AS(saturation_point({}, 0.0), ValidationError);
  CHECK_THROWS_AS(saturation_point({{1, 0.5}}, -0.1), ValidationError);
}

TEST_CASE("sweep config validation") {
  SweepConfig config;
  config.sizes = {};
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config.sizes = {0, 200, 200};
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config.sizes = {200, 0};
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config.sizes = {0, 200};
  CHECK_NOTHROW(config.validate());
  CHECK(SweepConfig::default_sizes().size() == 22);
}

TEST_CASE("synthetic sweep rows rise with the sample count") {
  SweepConfig config;
  config.sizes = {0, 200, 1000, 5000};
  config.trainer.type = TrainerSpec::Type::builtin_synthetic;
  config.trainer.noise = false;

  const SweepReport report = run_sweep(config);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].size == 0);
  REQUIRE(report.rows[0].report.average.has_value());
  CHECK(*report.rows[0].report.average == Catch::Approx(0.70).margin(1e-12));

  double previous = -1.0;
  for (const auto& row : report.rows) {
    REQUIRE_FALSE(row.failed);
    REQUIRE(row.report.per_attribute.size() == 8);
    REQUIRE(row.report.average.has_value());
    CHECK(*row.report.average > previous);
    previous = *row.report.average;
  }

  REQUIRE(report.saturation.has_value());
  CHECK(report.saturation->size == 5000);  // largest size has the max at epsilon 0
}

TEST_CASE("sweep reruns are byte-identical") {
  SweepConfig config;
  config.sizes = {0, 500, 1500};
  config.trainer.noise = true;
  config.seed = 11;
  const std::string first = sweep_table_tsv(run_sweep(config));
  const std::string second = sweep_table_tsv(run_sweep(config));
  CHECK(first == second);
  CHECK(first.rfind("Number of Samples\tPrice\tProduct Description", 0) == 0);
}

TEST_CASE("sweep with parallel workers matches the sequential run") {
  SweepConfig config;
  config.sizes = {0, 200, 500, 1000, 2000};
  config.trainer.noise = true;
  SweepConfig parallel = config;
  parallel.workers = 4;
  CHECK(sweep_table_tsv(run_sweep(config)) == sweep_table_tsv(run_sweep(parallel)));
}
