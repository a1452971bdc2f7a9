// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Runs one trial through the two-phase lifecycle against a trainer binding
// and derives the loss-minimum accuracy from the recorded curve.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "earlybo/error.hpp"
#include "earlybo/trainer.hpp"
#include "earlybo/trial.hpp"

namespace earlybo {

namespace detail {

inline bool curve_is_valid(const std::vector<LossSample>& samples, double lower_exclusive,
                           double upper_inclusive) {
  double previous = lower_exclusive;
  for (const auto& sample : samples) {
    if (!(sample.epoch_fraction > previous) ||
        sample.epoch_fraction > upper_inclusive + 1e-9) {
      return false;
    }
    if (!std::isfinite(sample.value)) return false;
    previous = sample.epoch_fraction;
  }
  return true;
}

}  // namespace detail

/// Trains a configuration from scratch to epoch fraction t1 and evaluates
/// it there. Trainer crashes and protocol violations become zero-accuracy
/// records; the study keeps going.
inline PhaseResult run_early(TrainerBinding& trainer, const TrialConfig& config,
                             const std::string& checkpoint_dir = {}) {
  config.validate();
  PhaseRequest request{config, Phase::early, TrainerMode::hpo, 0.0, checkpoint_dir};
  TrainerResult outcome = trainer.run(request);

  PhaseResult result;
  result.phase = Phase::early;
  result.status = outcome.status;
  result.loss_curve = std::move(outcome.losses);
  result.per_attribute = std::move(outcome.per_attribute);
  if (!detail::curve_is_valid(result.loss_curve, 0.0, config.t1)) {
    result.status = PhaseStatus::degenerate;
    result.loss_curve.clear();
  }
  result.accuracy = result.status == PhaseStatus::ok ? outcome.accuracy : 0.0;
  if (result.status == PhaseStatus::ok) {
    result.checkpoint_ref = trainer.checkpoint_ref(request);
  }
  return result;
}

/// Resumes the early checkpoint to t2 without retraining the early segment.
/// The returned curve carries the early samples followed by the new ones.
inline PhaseResult run_continue(TrainerBinding& trainer, const TrialRecord& record) {
  if (record.early.status != PhaseStatus::ok) {
    throw ValidationError("trial " + std::to_string(record.config.trial_id) +
                          ": cannot continue a trial whose early phase is not ok");
  }
  const std::string& ref = record.early.checkpoint_ref;
  const std::string expected_synth = "synth:" + std::to_string(record.config.trial_id);
  if (ref.empty()) {
    throw StudyError("trial " + std::to_string(record.config.trial_id) +
                     ": missing checkpoint reference");
  }
  if (ref.rfind("synth:", 0) != 0 && !std::filesystem::exists(ref)) {
    throw StudyError("trial " + std::to_string(record.config.trial_id) +
                     ": checkpoint '" + ref + "' does not exist");
  }
  if (ref.rfind("synth:", 0) == 0 && ref != expected_synth) {
    throw StudyError("trial " + std::to_string(record.config.trial_id) +
                     ": checkpoint token '" + ref + "' belongs to another trial");
  }

  PhaseRequest request{record.config, Phase::late, TrainerMode::hpo, 0.0,
                       ref.rfind("synth:", 0) == 0 ? std::string{} : ref};
  TrainerResult outcome = trainer.run(request);

  PhaseResult result;
  result.phase = Phase::late;
  result.status = outcome.status;
  result.per_attribute = std::move(outcome.per_attribute);
  if (!detail::curve_is_valid(outcome.losses, record.config.t1, record.config.t2)) {
    result.status = PhaseStatus::degenerate;
    outcome.losses.clear();
  }
  result.loss_curve = record.early.loss_curve;
  result.loss_curve.insert(result.loss_curve.end(), outcome.losses.begin(),
                           outcome.losses.end());
  result.accuracy = result.status == PhaseStatus::ok ? outcome.accuracy : 0.0;
  result.checkpoint_ref = record.early.checkpoint_ref;
  return result;
}

/// Epoch fraction of the lowest recorded validation loss (earliest sample
/// on ties).
inline double loss_minimum_fraction(const std::vector<LossSample>& curve) {
  if (curve.empty()) throw ValidationError("loss curve is empty");
  const LossSample* best = &curve.front();
  for (const auto& sample : curve) {
    if (sample.value < best->value) best = &sample;
  }
  return best->epoch_fraction;
}

/// Accuracy of the checkpoint at the loss-minimum fraction. The synthetic
/// trainer evaluates its curve there exactly; external trainers are asked
/// to score the saved checkpoint closest to that fraction.
inline double minima_accuracy(const TrialRecord& record, TrainerBinding& trainer) {
  if (!record.late.has_value()) {
    throw ValidationError("trial " + std::to_string(record.config.trial_id) +
                          ": minima accuracy needs a completed late phase");
  }
  const double fraction = loss_minimum_fraction(record.late->loss_curve);
  const std::string& ref = record.early.checkpoint_ref;
  PhaseRequest request{record.config, Phase::eval, TrainerMode::hpo, fraction,
                       ref.rfind("synth:", 0) == 0 ? std::string{} : ref};
  TrainerResult outcome = trainer.run(request);
  if (outcome.status == PhaseStatus::crashed) {
    throw StudyError("trial " + std::to_string(record.config.trial_id) +
                     ": checkpoint evaluation failed: " + outcome.detail);
  }
  return outcome.status == PhaseStatus::ok ? outcome.accuracy : 0.0;
}

}  // namespace earlybo
