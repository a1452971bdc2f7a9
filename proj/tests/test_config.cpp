// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "earlybo/config.hpp"

using namespace earlybo;
using nlohmann::json;

TEST_CASE("an empty document takes the published defaults") {
  const StudyDocument document = parse_study_document(json::object());
  const StudyConfig& config = document.config;
  CHECK(config.iterations == 60);
  CHECK(config.n_initial_random == 8);
  CHECK(config.top_k == 5);
  CHECK(config.t1 == 0.2);
  CHECK(config.t2 == 0.8);
  CHECK(config.kappa_explore == 5.0);
  CHECK(config.kappa_exploit == 1.0);
  CHECK(config.n_samples == 1000);
  CHECK(config.n_epochs == 10);
  CHECK(config.space.size() == 6);
  CHECK(config.trainer.type == TrainerSpec::Type::builtin_synthetic);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK_THROWS_WITH(parse_study_document(json{{"iteratons", 60}}),
                    Catch::Matchers::ContainsSubstring("iteratons"));
  CHECK_THROWS_WITH(parse_study_document(json{{"trainer", {{"typ", "external"}}}}),
                    Catch::Matchers::ContainsSubstring("trainer.typ"));
  CHECK_THROWS_WITH(
      parse_study_document(json{{"space", json::array({{{"name", "lora_rank"}, {"max", 64}}})}}),
      Catch::Matchers::ContainsSubstring("space.max"));
}

TEST_CASE("space overrides may narrow but not widen the published bounds") {
  const json narrowed = {
      {"space", json::array({{{"name", "lora_dropout"}, {"low", 0.2}, {"high", 0.5}}})}};
  const StudyDocument document = parse_study_document(narrowed);
  const auto& dims = document.config.space.dimensions();
  CHECK(dims[5].low == 0.2);
  CHECK(dims[5].high == 0.5);

  const json widened = {
      {"space", json::array({{{"name", "lora_dropout"}, {"high", 1.5}}})}};
  CHECK_THROWS_WITH(parse_study_document(widened),
                    Catch::Matchers::ContainsSubstring("lora_dropout"));

  const json bad_kind = {
      {"space", json::array({{{"name", "lora_dropout"}, {"kind", "integer"}}})}};
  CHECK_THROWS_AS(parse_study_document(bad_kind), ValidationError);

  const json unknown_dim = {
      {"space", json::array({{{"name", "weight_decay"}, {"low", 0.0}}})}};
  CHECK_THROWS_AS(parse_study_document(unknown_dim), ValidationError);
}

TEST_CASE("trainer section is strict per type") {
  CHECK_THROWS_AS(
      parse_study_document(json{{"trainer", {{"type", "external"}}}}),
      ValidationError);
  CHECK_THROWS_AS(
      parse_study_document(
          json{{"trainer", {{"type", "builtin-synthetic"}, {"command", "x"}}}}),
      ValidationError);
  CHECK_THROWS_AS(
      parse_study_document(
          json{{"trainer", {{"type", "external"}, {"command", "x"}, {"noise", true}}}}),
      ValidationError);

  const StudyDocument document = parse_study_document(
      json{{"trainer", {{"type", "external"}, {"command", "run-trainer --gpu 0"}}}});
  CHECK(document.config.trainer.type == TrainerSpec::Type::external);
  CHECK(document.config.trainer.command == "run-trainer --gpu 0");
}

TEST_CASE("invalid study parameters are rejected") {
  CHECK_THROWS_AS(parse_study_document(json{{"t1", 0.9}, {"t2", 0.8}}), ValidationError);
  CHECK_THROWS_AS(parse_study_document(json{{"top_k", 0}}), ValidationError);
  CHECK_THROWS_AS(parse_study_document(json{{"initial_random", 90}}), ValidationError);
  CHECK_THROWS_AS(
      parse_study_document(json{{"kappa_explore", 1.0}, {"kappa_exploit", 5.0}}),
      ValidationError);
  CHECK_THROWS_AS(parse_study_document(json{{"iterations", "sixty"}}), ValidationError);
}

TEST_CASE("the echoed document round-trips and carries provenance") {
  json doc = {{"iterations", 24}, {"initial_random", 6}, {"seed", 99},
              {"trainer", {{"type", "builtin-synthetic"}, {"noise", true}}}};
  const StudyDocument document = parse_study_document(doc);
  const json echo = study_document_to_json(document);

  CHECK(echo.at("iterations") == 24);
  CHECK(echo.at("seed") == 99);
  CHECK(echo.at("t1") == 0.2);  // defaults materialized
  REQUIRE(echo.contains("metadata"));
  CHECK(echo["metadata"].contains("config_digest"));
  CHECK(echo["metadata"]["target_chains"]["0"] ==
        json::array({"q_proj", "v_proj"}));
  CHECK(echo["metadata"]["target_chains"]["3"].size() == 5);

  const StudyDocument back = parse_study_document_echo(echo);
  CHECK(back.config.iterations == 24);
  CHECK(back.config.master_seed == 99);
  CHECK(back.config.trainer.noise == true);
  CHECK(study_document_to_json(back).dump() == echo.dump());
}

TEST_CASE("sweep documents parse with fixed-hyperparameter defaults") {
  const SweepDocument document = parse_sweep_document(json::object());
  CHECK(document.config.sizes.size() == 22);
  CHECK(document.config.n_epochs == 12);
  CHECK(document.config.fixed_params.learning_rate == 1e-4);
  CHECK(document.config.fixed_params.batch_size == 16);
  CHECK(document.config.fixed_params.lora_target_index == 0);
  CHECK(document.config.fixed_params.lora_rank == 16);
  CHECK(document.config.fixed_params.lora_alpha == 32.0);
  CHECK(document.config.fixed_params.lora_dropout == 0.1);

  CHECK_THROWS_AS(parse_sweep_document(json{{"sizes", json::array()}}), ValidationError);
  CHECK_THROWS_AS(parse_sweep_document(json{{"sizes", {100, 100}}}), ValidationError);
  CHECK_THROWS_AS(parse_sweep_document(json{{"learning_rate", 1.0}}), ValidationError);
  CHECK_THROWS_AS(parse_sweep_document(json{{"unknown", 1}}), ValidationError);
}

TEST_CASE("kernel section parses") {
  const json doc = {{"kernel",
                     {{"family", "squared-exponential"},
                      {"signal_variance", 2.0},
                      {"jitter", 1e-10}}}};
  const StudyDocument document = parse_study_document(doc);
  CHECK(document.config.kernel.family == KernelFamily::squared_exponential);
  CHECK(document.config.kernel.signal_variance == 2.0);
  CHECK(document.config.kernel.jitter == 1e-10);
  CHECK(document.config.kernel.noise_variance == 1e-6);
}
