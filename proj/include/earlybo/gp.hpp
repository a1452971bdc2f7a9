// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Gaussian-process regression over unit-cube points: the surrogate that
// supplies the predictive mean and standard deviation consumed by the
// acquisition function.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "earlybo/detail/hash.hpp"
#include "earlybo/detail/rng.hpp"
#include "earlybo/error.hpp"
#include "earlybo/search_space.hpp"

namespace earlybo {

enum class KernelFamily { squared_exponential, matern52 };

inline const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::squared_exponential: return "squared-exponential";
    case KernelFamily::matern52: return "matern-5/2";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "squared-exponential") return KernelFamily::squared_exponential;
  if (s == "matern-5/2" || s == "matern52") return KernelFamily::matern52;
  throw ValidationError("unknown kernel family '" + s + "'");
}

struct KernelConfig {
  KernelFamily family = KernelFamily::matern52;
  std::vector<double> length_scales;  // one per dimension; anisotropic
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
  double jitter = 1e-13;

  void validate(std::size_t arity) const {
    if (length_scales.size() != arity) {
      throw ValidationError("kernel has " + std::to_string(length_scales.size()) +
                            " length scales for arity " + std::to_string(arity));
    }
    for (double ls : length_scales) {
      if (!(ls > 0.0)) throw ValidationError("length scales must be positive");
    }
    if (!(signal_variance > 0.0)) throw ValidationError("signal variance must be positive");
    if (noise_variance < 0.0) throw ValidationError("noise variance must be non-negative");
    if (!(jitter > 0.0)) throw ValidationError("jitter must be positive");
  }

  static KernelConfig defaults(std::size_t arity) {
    KernelConfig config;
    config.length_scales.assign(arity, 1.0);
    return config;
  }
};

namespace detail {

inline double kernel_value(const KernelConfig& k, const UnitPoint& a, const UnitPoint& b) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / k.length_scales[i];
    r2 += d * d;
  }
  switch (k.family) {
    case KernelFamily::squared_exponential:
      return k.signal_variance * std::exp(-0.5 * r2);
    case KernelFamily::matern52: {
      const double r = std::sqrt(r2);
      const double sqrt5r = std::sqrt(5.0) * r;
      return k.signal_variance * (1.0 + sqrt5r + 5.0 * r2 / 3.0) * std::exp(-sqrt5r);
    }
  }
  return 0.0;
}

}  // namespace detail

/// Fitted GP surrogate. Immutable after fit; concurrent predict calls are
/// safe.
class GPModel {
 public:
  /// Predictive mean and standard deviation at x, in original objective
  /// units. Far from all data the posterior reverts to the target mean and
  /// the prior standard deviation.
  [[nodiscard]] std::pair<double, double> predict(const UnitPoint& x) const {
    if (x.size() != arity_) {
      throw ValidationError("query point arity " + std::to_string(x.size()) +
                            " does not match model arity " + std::to_string(arity_));
    }
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      k_star(i) = detail::kernel_value(kernel_, inputs_[static_cast<std::size_t>(i)], x);
    }
    const double mean_std = k_star.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
    double var_std = kernel_.signal_variance - v.squaredNorm();
    var_std = std::max(var_std, 0.0);
    return {mean_std * target_std_ + target_mean_, std::sqrt(var_std) * target_std_};
  }

  /// Log marginal likelihood of the standardized targets under the fitted
  /// kernel: -1/2 y' K~^-1 y - 1/2 log|K~| - n/2 log(2 pi).
  [[nodiscard]] double log_marginal_likelihood() const { return lml_; }

  [[nodiscard]] const KernelConfig& kernel() const { return kernel_; }
  [[nodiscard]] std::size_t size() const { return inputs_.size(); }
  [[nodiscard]] std::size_t arity() const { return arity_; }
  [[nodiscard]] double target_mean() const { return target_mean_; }
  [[nodiscard]] double target_std() const { return target_std_; }

  friend GPModel fit_gp(const std::vector<UnitPoint>&, const std::vector<double>&,
                        KernelConfig, bool, bool);

 private:
  GPModel() = default;

  // Factorize K + (noise + jitter) I, escalating jitter x10 up to 1e-2 when
  // the decomposition reports a conditioning problem.
  void factorize() {
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double kij = detail::kernel_value(kernel_, inputs_[static_cast<std::size_t>(i)],
                                                inputs_[static_cast<std::size_t>(j)]);
        gram(i, j) = kij;
        gram(j, i) = kij;
      }
    }
    double jitter = kernel_.jitter;
    while (true) {
      Eigen::MatrixXd k_tilde = gram;
      k_tilde.diagonal().array() += kernel_.noise_variance + jitter;
      llt_.compute(k_tilde);
      if (llt_.info() == Eigen::Success) break;
      if (jitter >= 1e-2) {
        throw Error("Gram matrix is not positive definite (jitter escalated to " +
                    std::to_string(jitter) + "); inputs are too degenerate to fit");
      }
      jitter *= 10.0;
    }
    kernel_.jitter = jitter;
    alpha_ = llt_.solve(targets_std_);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      log_det += std::log(llt_.matrixLLT()(i, i));
    }
    lml_ = -0.5 * targets_std_.dot(alpha_) - log_det -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  }

  std::vector<UnitPoint> inputs_;
  Eigen::VectorXd targets_std_;
  KernelConfig kernel_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  std::size_t arity_ = 0;
  double target_mean_ = 0.0;
  double target_std_ = 1.0;
  double lml_ = 0.0;
};

inline double log_marginal_likelihood(const GPModel& model) {
  return model.log_marginal_likelihood();
}

namespace detail {

// Bounded derivative-free maximization of the log marginal likelihood over
// log10(length scales), log10(signal variance) and log10(noise variance).
// Estimating the noise matters: with noisy objectives an interpolating
// surrogate chases evaluation noise and the acquisition argmin never
// settles.
struct HyperSearchBounds {
  static constexpr double ls_lo = -2.0, ls_hi = 2.0;    // length scales in [1e-2, 1e2]
  static constexpr double sv_lo = -3.0, sv_hi = 3.0;    // signal variance in [1e-3, 1e3]
  static constexpr double nv_lo = -8.0, nv_hi = -2.0;   // noise variance in [1e-8, 1e-2]
};

template <typename Objective>
std::pair<std::vector<double>, double> pattern_search(
    const Objective& objective, std::vector<double> x,
    const std::vector<double>& lo, const std::vector<double>& hi, int max_evals) {
  double best = objective(x);
  int evals = 1;
  double step = 0.5;
  while (step >= 0.02 && evals < max_evals) {
    bool improved = false;
    for (std::size_t i = 0; i < x.size() && evals < max_evals; ++i) {
      for (double dir : {+1.0, -1.0}) {
        double trial = std::clamp(x[i] + dir * step, lo[i], hi[i]);
        if (trial == x[i]) continue;
        const double saved = x[i];
        x[i] = trial;
        const double value = objective(x);
        ++evals;
        if (value > best) {
          best = value;
          improved = true;
        } else {
          x[i] = saved;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {x, best};
}

}  // namespace detail

/// Fits a GP to encoded points and objective values. Targets are centred
/// (and scaled to unit variance when the spread allows); failed-trial zeros
/// are expected in the data and are fit like any other observation. When
/// optimize_hypers is set, length scales and signal variance are chosen by
/// maximizing the log marginal likelihood from 8 deterministic restarts.
/// standardize=false fits the raw targets (useful when the prior already
/// lives in objective units).
inline GPModel fit_gp(const std::vector<UnitPoint>& points,
                      const std::vector<double>& objectives, KernelConfig kernel_init,
                      bool optimize_hypers = true, bool standardize = true) {
  if (points.empty()) {
    throw ValidationError("cannot fit a surrogate to zero points; seed with random trials");
  }
  if (points.size() != objectives.size()) {
    throw ValidationError("points/objectives size mismatch");
  }
  const std::size_t arity = points.front().size();
  for (const auto& p : points) {
    if (p.size() != arity) throw ValidationError("points have mixed arity");
  }
  for (double y : objectives) {
    if (!std::isfinite(y)) throw ValidationError("non-finite objective value");
  }
  if (kernel_init.length_scales.empty()) {
    kernel_init.length_scales.assign(arity, 1.0);
  }
  kernel_init.validate(arity);

  GPModel model;
  model.inputs_ = points;
  model.arity_ = arity;
  model.kernel_ = kernel_init;

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = objectives[static_cast<std::size_t>(i)];
  if (standardize) {
    model.target_mean_ = y.mean();
    const double variance =
        n > 1 ? (y.array() - model.target_mean_).square().sum() / static_cast<double>(n)
              : 0.0;
    model.target_std_ = variance < 1e-12 ? 1.0 : std::sqrt(variance);
  } else {
    model.target_mean_ = 0.0;
    model.target_std_ = 1.0;
  }
  model.targets_std_ = (y.array() - model.target_mean_) / model.target_std_;

  if (!optimize_hypers) {
    model.factorize();
    return model;
  }

  const std::size_t dim = arity + 2;  // log10 of: length scales, signal var, noise var
  std::vector<double> lo(dim, detail::HyperSearchBounds::ls_lo);
  std::vector<double> hi(dim, detail::HyperSearchBounds::ls_hi);
  lo[arity] = detail::HyperSearchBounds::sv_lo;
  hi[arity] = detail::HyperSearchBounds::sv_hi;
  lo[arity + 1] = detail::HyperSearchBounds::nv_lo;
  hi[arity + 1] = detail::HyperSearchBounds::nv_hi;

  auto apply = [&](const std::vector<double>& log_params, GPModel& m) {
    for (std::size_t i = 0; i < arity; ++i) {
      m.kernel_.length_scales[i] = std::pow(10.0, log_params[i]);
    }
    m.kernel_.signal_variance = std::pow(10.0, log_params[arity]);
    m.kernel_.noise_variance = std::pow(10.0, log_params[arity + 1]);
    m.kernel_.jitter = kernel_init.jitter;
  };
  auto objective = [&](const std::vector<double>& log_params) {
    GPModel probe = model;
    apply(log_params, probe);
    try {
      probe.factorize();
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
    return probe.log_marginal_likelihood();
  };

  std::vector<double> start(dim);
  for (std::size_t i = 0; i < arity; ++i) {
    start[i] = std::clamp(std::log10(kernel_init.length_scales[i]), lo[i], hi[i]);
  }
  start[arity] =
      std::clamp(std::log10(kernel_init.signal_variance), lo[arity], hi[arity]);
  start[arity + 1] = std::clamp(std::log10(std::max(kernel_init.noise_variance, 1e-8)),
                                lo[arity + 1], hi[arity + 1]);

  constexpr int kRestarts = 8;
  constexpr int kMaxEvalsPerRestart = 96;
  std::vector<double> best_params = start;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < kRestarts; ++restart) {
    std::vector<double> x0 = start;
    if (restart > 0) {
      detail::UnitRng rng(detail::stable_hash("gp-hyperopt-restart", restart));
      for (std::size_t i = 0; i < dim; ++i) {
        x0[i] = lo[i] + rng.next_unit() * (hi[i] - lo[i]);
      }
    }
    auto [x_opt, value] = detail::pattern_search(objective, x0, lo, hi, kMaxEvalsPerRestart);
    if (value > best_value) {
      best_value = value;
      best_params = x_opt;
    }
  }
  if (!std::isfinite(best_value)) {
    // Every candidate failed to factorize; fall back to the initial kernel
    // so factorize() can surface the conditioning error.
    best_params = start;
  }
  apply(best_params, model);
  model.factorize();
  return model;
}

inline std::pair<double, double> predict(const GPModel& model, const UnitPoint& x) {
  return model.predict(x);
}

}  // namespace earlybo
