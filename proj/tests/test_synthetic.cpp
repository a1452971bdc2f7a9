// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "earlybo/detail/rng.hpp"
#include "earlybo/search_space.hpp"
#include "earlybo/synthetic.hpp"

using namespace earlybo;

namespace {

// The reference configuration: unit-scaled lr and alpha both at 0.5.
ParamVector reference_params() {
  ParamVector p;
  p.lora_target_index = 3;
  p.learning_rate = 3.1622776601683794e-4;  // 10^-3.5
  p.batch_size = 1;
  p.lora_rank = 64;
  p.lora_alpha = 3.57772;
  p.lora_dropout = 0.1;
  return p;
}

ParamVector failing_params() {
  ParamVector p;
  p.learning_rate = 0.01;
  p.lora_alpha = 128.0;
  return p;
}

}  // namespace

TEST_CASE("reference curve values") {
  const ParamVector p = reference_params();
  CHECK(synth::asymptote(p) == Catch::Approx(0.9919999739557054).margin(1e-9));
  CHECK(synth::time_constant(p) == Catch::Approx(0.25).margin(1e-9));
  // Hand-evaluated curve points (frozen from an independent evaluation).
  CHECK(synth::accuracy(p, 0.2, 0, false) == Catch::Approx(0.5462656532538775).margin(1e-9));
  CHECK(synth::accuracy(p, 0.8, 0, false) == Catch::Approx(0.951563868670789).margin(1e-9));
  CHECK(synth::accuracy(p, 1.0, 0, false) == Catch::Approx(0.9738308606550989).margin(1e-9));
}

TEST_CASE("high lr x high alpha fails to zero") {
  const ParamVector p = failing_params();
  CHECK(synth::fails(p));
  for (double t : {0.1, 0.2, 0.5, 0.8, 1.0}) {
    CHECK(synth::accuracy(p, t, 42, true) == 0.0);
  }
}

TEST_CASE("failure predicate is monotone in lr and alpha") {
  detail::UnitRng rng(9);
  const SearchSpace space = default_space();
  int failed_seen = 0;
  for (int i = 0; i < 500; ++i) {
    UnitPoint point(space.size());
    for (auto& c : point) c = rng.next_unit();
    ParamVector p = decode(space, point);
    if (!synth::fails(p)) continue;
    ++failed_seen;
    ParamVector higher_lr = p;
    higher_lr.learning_rate = std::min(0.01, p.learning_rate * 2.0);
    REQUIRE(synth::fails(higher_lr));
    ParamVector higher_alpha = p;
    higher_alpha.lora_alpha = std::min(128.0, p.lora_alpha * 2.0);
    REQUIRE(synth::fails(higher_alpha));
  }
  REQUIRE(failed_seen > 10);  // the region is a meaningful fraction of the space
}

TEST_CASE("noiseless accuracy is strictly increasing in t") {
  detail::UnitRng rng(13);
  const SearchSpace space = default_space();
  int checked = 0;
  for (int i = 0; i < 100 && checked < 20; ++i) {
    UnitPoint point(space.size());
    for (auto& c : point) c = rng.next_unit();
    const ParamVector p = decode(space, point);
    if (synth::fails(p) || synth::asymptote(p) == 0.0) continue;
    ++checked;
    double previous = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double value = synth::accuracy(p, k / 20.0, 0, false);
      REQUIRE(value > previous);
      previous = value;
    }
  }
  REQUIRE(checked == 20);
}

TEST_CASE("t bounds are enforced") {
  const ParamVector p = reference_params();
  CHECK_THROWS_AS(synth::accuracy(p, 0.0, 0, false), ValidationError);
  CHECK_THROWS_AS(synth::accuracy(p, 1.5, 0, false), ValidationError);
  CHECK_NOTHROW(synth::accuracy(p, 1.0, 0, false));
}

TEST_CASE("noise is bounded, deterministic and seed-dependent") {
  const ParamVector p = reference_params();
  bool any_different = false;
  for (int k = 1; k <= 10; ++k) {
    const double t = k / 10.0;
    const double clean = synth::accuracy(p, t, 7, false);
    const double noisy1 = synth::accuracy(p, t, 7, true);
    const double noisy2 = synth::accuracy(p, t, 7, true);
    REQUIRE(noisy1 == noisy2);
    REQUIRE(std::abs(noisy1 - clean) <= 0.01 + 1e-12);
    if (synth::accuracy(p, t, 8, true) != noisy1) any_different = true;
  }
  CHECK(any_different);
}

TEST_CASE("loss is one minus accuracy") {
  const ParamVector p = reference_params();
  CHECK(synth::loss(p, 0.4, 3, true) ==
        Catch::Approx(1.0 - synth::accuracy(p, 0.4, 3, true)).margin(1e-15));
}

TEST_CASE("sweep curve rises from the baseline toward saturation") {
  CHECK(synth::sweep_accuracy(0, 0, false) == Catch::Approx(0.70).margin(1e-12));
  CHECK(synth::sweep_accuracy(200, 0, false) ==
        Catch::Approx(0.7299584034296925).margin(1e-9));
  CHECK(synth::sweep_accuracy(10000, 0, false) ==
        Catch::Approx(0.9396945678876784).margin(1e-9));
  double previous = -1.0;
  for (std::int64_t n : {0L, 200L, 500L, 1000L, 2500L, 5000L, 10000L}) {
    const double value = synth::sweep_accuracy(n, 0, false);
    REQUIRE(value > previous);
    previous = value;
  }
  CHECK_THROWS_AS(synth::sweep_accuracy(-1, 0, false), ValidationError);
}
