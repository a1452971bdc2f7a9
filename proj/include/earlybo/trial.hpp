// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Trial lifecycle types: one hyperparameter configuration moving through
// the early/late two-phase training schedule.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "earlybo/error.hpp"
#include "earlybo/search_space.hpp"

namespace earlybo {

enum class Phase { early, late, eval };

enum class PhaseStatus { ok, degenerate, crashed };

inline const char* to_string(PhaseStatus status) {
  switch (status) {
    case PhaseStatus::ok: return "ok";
    case PhaseStatus::degenerate: return "degenerate";
    case PhaseStatus::crashed: return "crashed";
  }
  return "?";
}

inline PhaseStatus phase_status_from_string(const std::string& s) {
  if (s == "ok") return PhaseStatus::ok;
  if (s == "degenerate") return PhaseStatus::degenerate;
  if (s == "crashed") return PhaseStatus::crashed;
  throw DataError("unknown phase status '" + s + "'");
}

struct LossSample {
  double epoch_fraction = 0.0;
  double value = 0.0;

  bool operator==(const LossSample&) const = default;
};

struct TrialConfig {
  int trial_id = 0;
  ParamVector params;
  std::uint64_t seed = 0;
  std::int64_t n_samples = 1000;
  int n_epochs = 10;
  double t1 = 0.2;
  double t2 = 0.8;

  /// Sweep runs use t1 == t2 == 1.0 (a single full-length phase); HPO
  /// studies additionally require t1 < t2 (checked by StudyConfig).
  void validate() const {
    if (n_epochs < 1) throw ValidationError("n_epochs must be >= 1");
    if (n_samples < 0) throw ValidationError("n_samples must be >= 0");
    if (!(t1 > 0.0 && t1 <= t2 && t2 <= 1.0)) {
      throw ValidationError("phase fractions must satisfy 0 < t1 <= t2 <= 1");
    }
  }
};

struct PhaseResult {
  Phase phase = Phase::early;
  double accuracy = 0.0;
  std::vector<LossSample> loss_curve;
  PhaseStatus status = PhaseStatus::ok;
  std::string checkpoint_ref;
  /// Per-attribute accuracies when the trainer reports them (optional
  /// protocol extension); empty otherwise.
  std::map<std::string, double> per_attribute;
};

enum class TrialOrigin { random_init, proposed };

inline const char* to_string(TrialOrigin origin) {
  return origin == TrialOrigin::random_init ? "random-init" : "proposed";
}

inline TrialOrigin trial_origin_from_string(const std::string& s) {
  if (s == "random-init") return TrialOrigin::random_init;
  if (s == "proposed") return TrialOrigin::proposed;
  throw DataError("unknown trial origin '" + s + "'");
}

/// One pool entry: a configuration, its phase results, and provenance.
struct TrialRecord {
  TrialConfig config;
  PhaseResult early;
  std::optional<PhaseResult> late;
  std::optional<double> minima_accuracy;
  TrialOrigin origin = TrialOrigin::random_init;
  std::optional<double> kappa_used;
  /// Pool size visible when this trial was proposed; lets parallel-worker
  /// proposals be audited after the fact.
  std::optional<int> pool_size_at_proposal;
  /// Wall-clock stamps; left empty by the builtin synthetic trainer so
  /// that reruns of a seeded study are byte-identical.
  std::string started_at;
  std::string finished_at;
};

}  // namespace earlybo
