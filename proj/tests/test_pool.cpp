// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <fstream>

#include "earlybo/pool.hpp"
#include "fixtures.hpp"

using namespace earlybo;

namespace {

TrialRecord sample_record(int id) {
  TrialRecord record;
  record.config.trial_id = id;
  record.config.seed = 42 + static_cast<std::uint64_t>(id);
  record.config.params.learning_rate = 1e-4;
  record.origin = id < 2 ? TrialOrigin::random_init : TrialOrigin::proposed;
  record.early.status = PhaseStatus::ok;
  record.early.accuracy = 0.5 + 0.01 * id;
  record.early.loss_curve = {{0.1, 0.6}, {0.2, 0.5}};
  record.early.checkpoint_ref = "synth:" + std::to_string(id);
  if (id >= 2) {
    record.kappa_used = 5.0;
    record.pool_size_at_proposal = id;
  }
  return record;
}

}  // namespace

TEST_CASE("records round-trip through JSON") {
  TrialRecord record = sample_record(7);
  record.late = PhaseResult{Phase::late, 0.9, {{0.1, 0.6}, {0.5, 0.2}}, PhaseStatus::ok,
                            "synth:7", {{"price", 0.95}}};
  record.minima_accuracy = 0.91;
  record.started_at = "2026-08-09T10:00:00Z";
  record.finished_at = "2026-08-09T10:05:00Z";

  const TrialRecord back = record_from_json(record_to_json(record));
  CHECK(back.config.trial_id == 7);
  CHECK(back.config.seed == record.config.seed);
  CHECK(back.origin == record.origin);
  CHECK(back.early.accuracy == record.early.accuracy);
  CHECK(back.early.loss_curve == record.early.loss_curve);
  REQUIRE(back.late.has_value());
  CHECK(back.late->accuracy == 0.9);
  CHECK(back.late->per_attribute.at("price") == 0.95);
  CHECK(back.minima_accuracy == record.minima_accuracy);
  CHECK(back.kappa_used == record.kappa_used);
  CHECK(back.pool_size_at_proposal == record.pool_size_at_proposal);
  CHECK(back.started_at == record.started_at);

  // Serialization is stable: same record, same bytes.
  CHECK(record_to_json(record).dump() == record_to_json(back).dump());
}

TEST_CASE("optional fields are omitted when absent") {
  const nlohmann::json j = record_to_json(sample_record(0));
  CHECK_FALSE(j.contains("late"));
  CHECK_FALSE(j.contains("minima_accuracy"));
  CHECK_FALSE(j.contains("kappa_used"));
  CHECK_FALSE(j.contains("started_at"));
}

TEST_CASE("pool appends require unique ids and sane accuracies") {
  ResultPool pool;
  pool.append(sample_record(0));
  CHECK_THROWS_AS(pool.append(sample_record(0)), StudyError);

  TrialRecord bad = sample_record(1);
  bad.early.accuracy = 1.5;
  CHECK_THROWS_AS(pool.append(bad), StudyError);

  CHECK_THROWS_AS(pool.update(sample_record(5)), StudyError);
  CHECK_THROWS_AS(pool.at(99), ValidationError);
}

TEST_CASE("later pool lines supersede earlier ones") {
  fixtures::ScratchDir scratch("pool");
  const auto path = scratch.path() / "pool.jsonl";

  append_pool_line(path, sample_record(0));
  append_pool_line(path, sample_record(1));
  TrialRecord updated = sample_record(0);
  updated.late = PhaseResult{Phase::late, 0.88, {{0.1, 0.6}, {0.8, 0.1}}, PhaseStatus::ok,
                             "synth:0", {}};
  updated.minima_accuracy = 0.89;
  append_pool_line(path, updated);

  const ResultPool pool = load_pool(path);
  REQUIRE(pool.size() == 2);
  REQUIRE(pool.at(0).late.has_value());
  CHECK(pool.at(0).late->accuracy == 0.88);
  CHECK(pool.at(0).minima_accuracy == 0.89);
  CHECK_FALSE(pool.at(1).late.has_value());
}

TEST_CASE("strict loading names the offending line") {
  fixtures::ScratchDir scratch("poolbad");
  const auto path = scratch.path() / "pool.jsonl";

  SECTION("truncated trailing line") {
    append_pool_line(path, sample_record(0));
    std::ofstream out(path, std::ios::app);
    out << R"({"trial_id": 1, "origin")";  // cut off mid-record
    out.close();
    CHECK_THROWS_WITH(load_pool(path), Catch::Matchers::ContainsSubstring("line 2"));
  }

  SECTION("missing required field") {
    std::ofstream out(path);
    out << R"({"trial_id": 0})" << "\n";
    out.close();
    CHECK_THROWS_AS(load_pool(path), DataError);
  }

  SECTION("non-dense ids") {
    append_pool_line(path, sample_record(0));
    append_pool_line(path, sample_record(2));
    CHECK_THROWS_WITH(load_pool(path), Catch::Matchers::ContainsSubstring("dense"));
  }

  SECTION("blank line") {
    append_pool_line(path, sample_record(0));
    std::ofstream out(path, std::ios::app);
    out << "\n";
    out.close();
    CHECK_THROWS_WITH(load_pool(path), Catch::Matchers::ContainsSubstring("line 2"));
  }

  SECTION("missing file") {
    CHECK_THROWS_AS(load_pool(scratch.path() / "nope.jsonl"), DataError);
  }
}
