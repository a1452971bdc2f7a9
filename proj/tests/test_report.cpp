// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "earlybo/report.hpp"
#include "fixtures.hpp"

using namespace earlybo;

namespace {

std::vector<int> ids_of(const std::vector<RankEntry>& column) {
  std::vector<int> ids;
  for (const auto& entry : column) ids.push_back(entry.trial_id);
  return ids;
}

}  // namespace

TEST_CASE("rank table reproduces the published top-5 rankings") {
  const auto pool = fixtures::ranking_fixture_pool();
  const RankTable table = rank_table(pool, 5);

  CHECK(ids_of(table.t1) == std::vector<int>{4, 30, 33, 31, 32});
  CHECK(ids_of(table.t2) == std::vector<int>{30, 33, 32, 39, 31});
  CHECK(table.minima.front().trial_id == 56);
  CHECK(table.minima.front().accuracy == Catch::Approx(0.9222));

  CHECK(top_k_overlap(table.t1, table.t2, 5) == 4);
}

TEST_CASE("rank table reproduces the published top-10 at t1") {
  const auto pool = fixtures::ranking_fixture_pool();
  const RankTable table = rank_table(pool, 10);
  CHECK(ids_of(table.t1) == std::vector<int>{4, 30, 33, 31, 32, 56, 29, 38, 39, 40});
  CHECK(ids_of(table.minima) ==
        std::vector<int>{56, 39, 28, 30, 32, 15, 21, 33, 38, 31});
}

TEST_CASE("overlap edge cases") {
  std::vector<RankEntry> a = {{1, 0.9}, {2, 0.8}, {3, 0.7}};
  std::vector<RankEntry> b = {{1, 0.9}, {2, 0.8}, {3, 0.7}};
  CHECK(top_k_overlap(a, b, 3) == 3);
  std::vector<RankEntry> c = {{7, 0.9}, {8, 0.8}, {9, 0.7}};
  CHECK(top_k_overlap(a, c, 3) == 0);
  CHECK_THROWS_AS(top_k_overlap(a, c, 4), ValidationError);
}

TEST_CASE("rank ties break toward the lower trial id") {
  std::vector<TrialRecord> records(3);
  for (int i = 0; i < 3; ++i) {
    records[static_cast<std::size_t>(i)].config.trial_id = 2 - i;
    records[static_cast<std::size_t>(i)].early.status = PhaseStatus::ok;
    records[static_cast<std::size_t>(i)].early.accuracy = 0.88;
  }
  const RankTable table = rank_table(records, 3);
  CHECK(ids_of(table.t1) == std::vector<int>{0, 1, 2});
}

TEST_CASE("a pool of one continued trial yields single-entry columns") {
  std::vector<TrialRecord> records(1);
  records[0].config.trial_id = 0;
  records[0].early.status = PhaseStatus::ok;
  records[0].early.accuracy = 0.5;
  records[0].late = PhaseResult{Phase::late, 0.7, {}, PhaseStatus::ok, "", {}};
  records[0].minima_accuracy = 0.71;
  const RankTable table = rank_table(records, 5);
  CHECK(table.t1.size() == 1);
  CHECK(table.t2.size() == 1);
  CHECK(table.minima.size() == 1);
}

TEST_CASE("rank table requires an ok trial") {
  std::vector<TrialRecord> records(1);
  records[0].early.status = PhaseStatus::degenerate;
  CHECK_THROWS_AS(rank_table(records, 5), ValidationError);
}

TEST_CASE("spearman correlation") {
  CHECK(*spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == Catch::Approx(1.0));
  CHECK(*spearman_rho({1, 2, 3, 4}, {40, 30, 20, 10}) == Catch::Approx(-1.0));
  CHECK(*spearman_rho({1, 2, 3, 4}, {1, 3, 2, 4}) == Catch::Approx(0.8).margin(1e-12));
  CHECK_FALSE(spearman_rho({1, 1, 1}, {1, 2, 3}).has_value());
  CHECK_THROWS_AS(spearman_rho({1.0}, {2.0}), ValidationError);
  CHECK_THROWS_AS(spearman_rho({1, 2}, {1, 2, 3}), ValidationError);
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
  const std::vector<double> xs = {0.1, 0.9, 0.4, 0.7, 0.2};
  const std::vector<double> ys = {0.3, 0.8, 0.1, 0.9, 0.5};
  std::vector<double> exp_xs;
  for (double x : xs) exp_xs.push_back(std::exp(5.0 * x));
  CHECK(*spearman_rho(xs, ys) == Catch::Approx(*spearman_rho(exp_xs, ys)).margin(1e-12));
}

TEST_CASE("spearman handles ties with average ranks") {
  // scipy.stats.spearmanr([1,2,2,3],[1,2,3,4]) = 0.9486832980505139
  CHECK(*spearman_rho({1, 2, 2, 3}, {1, 2, 3, 4}) ==
        Catch::Approx(0.9486832980505139).margin(1e-12));
}

TEST_CASE("failure scatter flags zero-accuracy trials") {
  std::vector<TrialRecord> records(2);
  records[0].config.trial_id = 0;
  records[0].config.params.learning_rate = 0.01;
  records[0].config.params.lora_alpha = 128.0;
  records[0].early.status = PhaseStatus::degenerate;
  records[0].early.accuracy = 0.0;
  records[1].config.trial_id = 1;
  records[1].config.params.learning_rate = 1e-4;
  records[1].config.params.lora_alpha = 16.0;
  records[1].early.status = PhaseStatus::ok;
  records[1].early.accuracy = 0.8;

  const auto points = failure_scatter(records);
  REQUIRE(points.size() == 2);
  CHECK(points[0].failed);
  CHECK(points[0].learning_rate == 0.01);
  CHECK(points[0].lora_alpha == 128.0);
  CHECK_FALSE(points[1].failed);

  CHECK(failure_scatter({}).empty());
}

TEST_CASE("loss curves exclude crashed trials and reject unknown ids") {
  std::vector<TrialRecord> records(2);
  records[0].config.trial_id = 0;
  records[0].early.status = PhaseStatus::ok;
  records[0].early.loss_curve = {{0.1, 0.5}, {0.2, 0.4}};
  records[0].late = PhaseResult{
      Phase::late, 0.9, {{0.1, 0.5}, {0.2, 0.4}, {0.5, 0.2}}, PhaseStatus::ok, "", {}};
  records[1].config.trial_id = 1;
  records[1].early.status = PhaseStatus::crashed;

  const LossCurves curves = loss_curves(records, {0, 1});
  REQUIRE(curves.series.count(0) == 1);
  CHECK(curves.series.at(0).size() == 3);  // the full (late) curve
  CHECK(curves.excluded_crashed == std::vector<int>{1});

  CHECK_THROWS_AS(loss_curves(records, {5}), ValidationError);
}

TEST_CASE("param table lists the best-at-t1 configurations") {
  auto pool = fixtures::ranking_fixture_pool();
  const auto rows = param_table(pool, 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].trial_id == 4);
  CHECK(rows[1].trial_id == 30);
  CHECK(rows[2].trial_id == 33);
  CHECK(rows[0].accuracy == Catch::Approx(0.9022));
}

TEST_CASE("comparison report computes the delta") {
  EvalReport a, b;
  a.average = 0.8848;
  b.average = 0.9042;
  const Comparison comparison = compare_reports("baseline", a, "tuned", b);
  CHECK(comparison.delta == Catch::Approx(0.0194).margin(1e-12));
  EvalReport undefined;
  CHECK_THROWS_AS(compare_reports("a", undefined, "b", b), ValidationError);
}

TEST_CASE("independent score files load strictly") {
  fixtures::ScratchDir scratch("indep");
  const auto path = scratch.path() / "scores.jsonl";
  {
    std::ofstream out(path);
    out << R"({"trial_id": 56, "phase": "minima", "accuracy": 0.9042})" << "\n";
    out << R"({"trial_id": 4, "phase": "t1", "accuracy": 0.8791})" << "\n";
  }
  const IndependentScores scores = load_independent_scores(path);
  CHECK(scores.at({"minima", 56}) == Catch::Approx(0.9042));
  CHECK(scores.at({"t1", 4}) == Catch::Approx(0.8791));

  {
    std::ofstream out(path, std::ios::app);
    out << R"({"trial_id": 1, "phase": "t9", "accuracy": 0.5})" << "\n";
  }
  CHECK_THROWS_AS(load_independent_scores(path), DataError);
}

TEST_CASE("renders are deterministic") {
  const auto pool = fixtures::ranking_fixture_pool();
  const RankTable table = rank_table(pool, 5);
  CHECK(render_rank_table(table) == render_rank_table(table));
  CHECK(rank_table_tsv(table) == rank_table_tsv(table));
  CHECK(scatter_tsv(failure_scatter(pool)) == scatter_tsv(failure_scatter(pool)));
}
