// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic training curves: a desk-scale stand-in for LoRA
// fine-tuning shaped to show the same qualitative phenomena (saturating
// learning curves, a high-lr x high-alpha failure region, noisy
// evaluation).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "earlybo/detail/hash.hpp"
#include "earlybo/error.hpp"
#include "earlybo/search_space.hpp"

namespace earlybo::synth {

/// Learning rate position within its log-scaled range, in [0, 1].
inline double unit_learning_rate(const ParamVector& p) {
  return (std::log10(p.learning_rate) + 5.0) / 3.0;
}

/// LoRA alpha position within its log-scaled range, in [0, 1].
inline double unit_alpha(const ParamVector& p) {
  return (std::log10(p.lora_alpha) + 1.0) / 3.10721;
}

/// Configurations in the upper-right corner of the lr x alpha plane diverge
/// and score zero, like real runs where both values are high.
inline bool fails(const ParamVector& p) {
  return unit_learning_rate(p) + unit_alpha(p) > 1.4;
}

/// Asymptotic accuracy of a configuration (the value training approaches as
/// t -> infinity); 0 for failed configurations.
inline double asymptote(const ParamVector& p) {
  if (fails(p)) return 0.0;
  const double u_lr = unit_learning_rate(p);
  const double u_alpha = unit_alpha(p);
  const double u_batch = std::log2(static_cast<double>(p.batch_size)) / 5.0;
  const double u_rank = (p.lora_rank - 4.0) / 60.0;
  const double s = 0.5 * u_lr + 0.5 * u_alpha - 0.1 * u_batch;
  const double value = 0.95 - 1.2 * (s - 0.45) * (s - 0.45) - 0.05 * p.lora_dropout +
                       0.03 * p.lora_target_index / 3.0 + 0.02 * u_rank;
  return std::clamp(value, 0.0, 1.0);
}

/// Exponential-saturation time constant; low learning rates converge slowly.
inline double time_constant(const ParamVector& p) {
  return 0.1 + 0.3 * (1.0 - unit_learning_rate(p));
}

namespace detail_synth {

inline std::uint64_t params_digest(const ParamVector& p) {
  return earlybo::detail::stable_hash(p.lora_target_index, p.learning_rate, p.batch_size,
                                      p.lora_rank, p.lora_alpha, p.lora_dropout);
}

/// Deterministic perturbation in [-amplitude, amplitude] keyed by
/// (seed, params digest, hundredth-of-epoch bucket).
inline double noise_at(std::uint64_t seed, std::uint64_t digest, double t, double amplitude) {
  const auto bucket = static_cast<std::int64_t>(std::floor(100.0 * t + 1e-9));
  const std::uint64_t h = earlybo::detail::stable_hash(seed, digest, bucket);
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
  return (2.0 * unit - 1.0) * amplitude;
}

}  // namespace detail_synth

/// Validation accuracy of the synthetic trainer at epoch fraction t.
/// Deterministic in (params, t, seed); validation loss is 1 - accuracy.
/// The noise key deliberately carries no trial identity: re-evaluating the
/// same configuration reproduces the same measurement, the way repeated
/// proposals of one configuration behave as repeat measurements.
inline double accuracy(const ParamVector& params, double t, std::uint64_t seed,
                       bool noise) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw ValidationError("epoch fraction must lie in (0, 1]");
  }
  if (fails(params)) return 0.0;
  double value = asymptote(params) * (1.0 - std::exp(-t / time_constant(params)));
  if (noise) {
    value += detail_synth::noise_at(seed, detail_synth::params_digest(params), t, 0.01);
  }
  return std::clamp(value, 0.0, 1.0);
}

inline double loss(const ParamVector& params, double t, std::uint64_t seed, bool noise) {
  return 1.0 - accuracy(params, t, seed, noise);
}

/// Sweep-mode curve: accuracy as a function of training-set size under the
/// fixed sweep hyperparameters. Rises from ~0.70 (untrained baseline)
/// toward ~0.94. The optional attribute index decorrelates per-attribute
/// noise draws.
inline double sweep_accuracy(std::int64_t n_samples, std::uint64_t seed, bool noise,
                             int attribute_index = 0) {
  if (n_samples < 0) throw ValidationError("sample count must be non-negative");
  double value = 0.70 + 0.24 * (1.0 - std::exp(-static_cast<double>(n_samples) / 1500.0));
  if (noise) {
    const std::uint64_t digest = earlybo::detail::stable_hash("sweep", n_samples, attribute_index);
    value += detail_synth::noise_at(seed, digest, 1.0, 0.01);
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace earlybo::synth
