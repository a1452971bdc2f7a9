// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <fstream>
#include <sstream>

#include "earlybo/study.hpp"
#include "earlybo/synthetic.hpp"
#include "fixtures.hpp"

using namespace earlybo;

namespace {

StudyConfig small_config(std::uint64_t seed = 1, bool noise = false) {
  StudyConfig config;
  config.iterations = 12;
  config.n_initial_random = 4;
  config.top_k = 3;
  config.master_seed = seed;
  config.trainer.type = TrainerSpec::Type::builtin_synthetic;
  config.trainer.noise = noise;
  config.proposal.n_candidates = 256;  // keep the unit suite quick
  return config;
}

std::string pool_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string dump_records(const std::vector<TrialRecord>& records) {
  std::string out;
  for (const auto& record : records) out += record_to_json(record).dump() + "\n";
  return out;
}

}  // namespace

TEST_CASE("study produces the contracted record counts") {
  Study study(small_config());
  const StudyReport report = study.run();

  REQUIRE(report.records.size() == 12);
  int late_count = 0;
  for (const auto& record : report.records) {
    if (record.late.has_value()) {
      ++late_count;
      REQUIRE(record.early.status == PhaseStatus::ok);
      REQUIRE(record.minima_accuracy.has_value());
    }
    REQUIRE(record.early.accuracy >= 0.0);
    REQUIRE(record.early.accuracy <= 1.0);
  }
  CHECK(late_count == 3);
  CHECK(report.top_k_ids.size() == 3);
}

TEST_CASE("origins, kappas and snapshot sizes follow the schedule") {
  Study study(small_config());
  const StudyReport report = study.run();
  for (const auto& record : report.records) {
    const int id = record.config.trial_id;
    if (id < 4) {
      CHECK(record.origin == TrialOrigin::random_init);
      CHECK_FALSE(record.kappa_used.has_value());
    } else {
      CHECK(record.origin == TrialOrigin::proposed);
      REQUIRE(record.kappa_used.has_value());
      // iteration = id + 1; explore while 2 * iteration <= 12
      CHECK(*record.kappa_used == (id + 1 <= 6 ? 5.0 : 1.0));
      REQUIRE(record.pool_size_at_proposal.has_value());
      // Sequential workers: the surrogate saw exactly the first id records.
      CHECK(*record.pool_size_at_proposal == id);
    }
  }
}

TEST_CASE("the best configuration maximizes late accuracy with id tie-break") {
  Study study(small_config());
  const StudyReport report = study.run();
  REQUIRE(report.best_trial_id >= 0);
  for (const auto& record : report.records) {
    if (!record.late.has_value()) continue;
    const bool better = record.late->accuracy > report.best_accuracy;
    const bool tied_earlier = record.late->accuracy == report.best_accuracy &&
                              record.config.trial_id < report.best_trial_id;
    REQUIRE_FALSE(better);
    REQUIRE_FALSE(tied_earlier);
  }
  const auto [params, accuracy] = best_config(report);
  CHECK(accuracy == report.best_accuracy);
  CHECK(params == report.best_params);
}

TEST_CASE("a fixed seed reproduces the pool byte for byte") {
  Study a(small_config(7, /*noise=*/true));
  Study b(small_config(7, /*noise=*/true));
  CHECK(dump_records(a.run().records) == dump_records(b.run().records));

  Study c(small_config(8, true));
  CHECK(dump_records(a.pool().snapshot()) != dump_records(c.run().records));
}

TEST_CASE("study persists, truncation resumes to the identical pool") {
  fixtures::ScratchDir scratch("study");
  const auto full_dir = scratch.path() / "full";
  const auto cut_dir = scratch.path() / "cut";

  StudyConfig config = small_config(3, true);
  Study full(config, full_dir);
  full.run();
  const std::string full_bytes = pool_bytes(full_dir / "pool.jsonl");
  // 12 early lines + 3 continuation updates
  CHECK(std::count(full_bytes.begin(), full_bytes.end(), '\n') == 15);

  // Keep only the first 7 lines, as if the study died mid-flight.
  std::filesystem::create_directories(cut_dir);
  {
    std::istringstream in(full_bytes);
    std::ofstream out(cut_dir / "pool.jsonl");
    std::string line;
    for (int i = 0; i < 7 && std::getline(in, line); ++i) out << line << "\n";
  }
  Study resumed(config, cut_dir);
  const StudyReport report = resumed.resume();
  CHECK_FALSE(report.already_complete);
  CHECK(pool_bytes(cut_dir / "pool.jsonl") == full_bytes);

  // Resuming the now-complete study is a no-op.
  Study again(config, cut_dir);
  CHECK(again.resume().already_complete);
  CHECK(pool_bytes(cut_dir / "pool.jsonl") == full_bytes);
}

TEST_CASE("running twice in one directory is refused") {
  fixtures::ScratchDir scratch("rerun");
  StudyConfig config = small_config();
  Study first(config, scratch.path());
  first.run();
  Study second(config, scratch.path());
  CHECK_THROWS_AS(second.run(), StudyError);
}

TEST_CASE("a locked directory is refused") {
  fixtures::ScratchDir scratch("locked");
  std::ofstream(scratch.path() / "study.lock") << "locked\n";
  Study study(small_config(), scratch.path());
  CHECK_THROWS_AS(study.run(), StudyError);
}

TEST_CASE("an unreachable external trainer aborts before any trial") {
  fixtures::ScratchDir scratch("unreachable");
  StudyConfig config = small_config();
  config.trainer.type = TrainerSpec::Type::external;
  config.trainer.command = "/no/such/trainer-binary";
  config.trainer.noise = false;
  Study study(config, scratch.path());
  CHECK_THROWS_AS(study.run(), StudyError);
  CHECK_FALSE(std::filesystem::exists(scratch.path() / "pool.jsonl"));
}

TEST_CASE("an all-failed pool raises the no-viable-configuration error") {
  // Confine the space to the divergence corner: every trial fails.
  StudyConfig config = small_config();
  config.iterations = 6;
  config.n_initial_random = 2;
  config.top_k = 2;
  config.space = SearchSpace({
      {"lora_target_index", DimensionKind::integer, 0, 3},
      {"learning_rate", DimensionKind::log_real, 0.009, 0.01},
      {"batch_size", DimensionKind::integer, 1, 32},
      {"lora_rank", DimensionKind::integer, 4, 64},
      {"lora_alpha", DimensionKind::log_real, 100.0, 128.0},
      {"lora_dropout", DimensionKind::real, 0.1, 0.8},
  });
  Study study(config);
  CHECK_THROWS_WITH(study.run(), Catch::Matchers::ContainsSubstring("no viable configuration"));
  CHECK(study.pool().size() == 6);  // the pool survives the abort
  for (const auto& [id, record] : study.pool().records()) {
    CHECK(record.early.status == PhaseStatus::degenerate);
    CHECK(record.early.accuracy == 0.0);
  }
}

TEST_CASE("select_top_k ranks, warns and validates") {
  ResultPool pool;
  for (int id = 0; id < 4; ++id) {
    TrialRecord record;
    record.config.trial_id = id;
    record.early.status = id == 3 ? PhaseStatus::degenerate : PhaseStatus::ok;
    record.early.accuracy = id == 3 ? 0.0 : (id == 1 ? 0.9 : 0.88);
    pool.append(record);
  }

  const TopKSelection top2 = select_top_k(pool, 2);
  CHECK(top2.ids == std::vector<int>{1, 0});  // 0.88 tie: lower id first
  CHECK(top2.warning.empty());

  const TopKSelection top5 = select_top_k(pool, 5);
  CHECK(top5.ids == std::vector<int>{1, 0, 2});  // only three ok trials
  CHECK_FALSE(top5.warning.empty());

  CHECK_THROWS_AS(select_top_k(pool, 0), ValidationError);
  CHECK_THROWS_AS(select_top_k(ResultPool{}, 1), ValidationError);
}

TEST_CASE("select_top_k on an all-failed pool returns the warning path") {
  ResultPool pool;
  TrialRecord record;
  record.config.trial_id = 0;
  record.early.status = PhaseStatus::degenerate;
  record.early.accuracy = 0.0;
  pool.append(record);
  const TopKSelection selection = select_top_k(pool, 3);
  CHECK(selection.ids.empty());
  CHECK_FALSE(selection.warning.empty());
}

TEST_CASE("parallel workers preserve the study contract") {
  StudyConfig config = small_config(21, true);
  config.workers = 4;
  Study study(config);
  const StudyReport report = study.run();
  REQUIRE(report.records.size() == 12);
  int late_count = 0;
  for (const auto& record : report.records) {
    if (record.late.has_value()) ++late_count;
    const int id = record.config.trial_id;
    if (id >= 4) {
      REQUIRE(record.pool_size_at_proposal.has_value());
      CHECK(*record.pool_size_at_proposal >= 4);  // initial design is complete first
      CHECK(*record.pool_size_at_proposal < 12);
      CHECK(*record.kappa_used == (id + 1 <= 6 ? 5.0 : 1.0));
    }
  }
  CHECK(late_count == 3);
}

TEST_CASE("failed trials stay in the surrogate's training data") {
  // Removing zero-accuracy rows must be observable: the run_proposal path
  // feeds every pool entry to the surrogate, so a pool with failures still
  // fits (this is what lets the optimizer learn the failure region).
  StudyConfig config = small_config(5, false);
  config.iterations = 16;
  config.top_k = 2;
  Study study(config);
  const StudyReport report = study.run();
  bool any_failed = false;
  for (const auto& record : report.records) {
    if (record.early.status != PhaseStatus::ok) any_failed = true;
  }
  // With seed 5 the random design hits the failure corner at least once;
  // the study still completes all 16 trials around it.
  CHECK(any_failed);
  CHECK(report.records.size() == 16);
}
