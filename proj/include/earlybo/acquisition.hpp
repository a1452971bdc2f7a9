// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Lower-confidence-bound acquisition, the two-phase kappa schedule, and the
// proposal search that picks the next configuration to train.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "earlybo/detail/rng.hpp"
#include "earlybo/error.hpp"
#include "earlybo/gp.hpp"
#include "earlybo/search_space.hpp"

namespace earlybo {

/// Two-phase explore/exploit schedule over a study of N iterations.
struct KappaSchedule {
  double kappa_explore = 5.0;
  double kappa_exploit = 1.0;
  int total_iterations = 60;

  void validate() const {
    if (!(kappa_explore >= kappa_exploit && kappa_exploit >= 0.0)) {
      throw ValidationError("kappa schedule requires explore >= exploit >= 0");
    }
    if (total_iterations < 1) {
      throw ValidationError("schedule needs at least one iteration");
    }
  }
};

/// f(x) = mean - kappa * std; minimized to pick the next configuration.
inline double lcb(double mean, double std_dev, double kappa) {
  if (std_dev < 0.0) throw ValidationError("lcb: negative standard deviation");
  if (kappa < 0.0) throw ValidationError("lcb: negative kappa");
  return mean - kappa * std_dev;
}

/// kappa_explore for the first half of the study (i <= N/2, 1-based),
/// kappa_exploit afterwards.
inline double kappa_for_iteration(int iteration, const KappaSchedule& schedule) {
  schedule.validate();
  if (iteration < 1 || iteration > schedule.total_iterations) {
    throw ValidationError("iteration " + std::to_string(iteration) + " outside [1, " +
                          std::to_string(schedule.total_iterations) + "]");
  }
  return 2 * iteration <= schedule.total_iterations ? schedule.kappa_explore
                                                    : schedule.kappa_exploit;
}

struct ProposeOptions {
  int n_candidates = 2048;
  int refine_starts = 8;    // random multi-start: best candidates refined
  int golden_steps = 20;    // golden-section steps per coordinate
  /// Returned points snap to this encoded-space grid. Keeps proposals
  /// exactly reproducible across near-identical surrogate states, which is
  /// what makes repeat proposals of one configuration detectable (and lets
  /// them act as repeat measurements). 0 disables snapping.
  double lattice = 1e-3;
};

namespace detail {

inline double acquisition_at(const GPModel& model, const UnitPoint& x, double kappa) {
  const auto [mean, std_dev] = model.predict(x);
  return lcb(mean, std_dev, kappa);
}

// One coordinate-descent pass: a golden-section search on each coordinate
// in turn, keeping the best probed value (strict improvement only, so tie
// surfaces leave the start untouched).
inline void refine_pass(const GPModel& model, double kappa, int golden_steps,
                        UnitPoint& point, double& value) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t dim = 0; dim < point.size(); ++dim) {
    double lo = 0.0, hi = 1.0;
    double best_t = point[dim];
    double best_value = value;
    double c = hi - (hi - lo) * inv_phi;
    double d = lo + (hi - lo) * inv_phi;
    UnitPoint probe = point;
    auto eval = [&](double t) {
      probe[dim] = t;
      const double v = acquisition_at(model, probe, kappa);
      if (v < best_value) {
        best_value = v;
        best_t = t;
      }
      return v;
    };
    double fc = eval(c);
    double fd = eval(d);
    for (int step = 2; step < golden_steps; ++step) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - (hi - lo) * inv_phi;
        fc = eval(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + (hi - lo) * inv_phi;
        fd = eval(d);
      }
    }
    if (best_value < value) {
      point[dim] = best_t;
      value = best_value;
    }
  }
}

}  // namespace detail

/// Minimizes the LCB surface over the unit cube: a deterministic seeded
/// candidate sweep followed by coordinate-wise golden-section refinement of
/// the best starts. Ties keep the earliest candidate in seeded order.
inline ParamVector propose(const GPModel& model, const SearchSpace& space, double kappa,
                           std::uint64_t rng_seed, const ProposeOptions& options = {}) {
  if (options.n_candidates < 1) {
    throw ValidationError("propose requires at least one candidate");
  }
  if (model.arity() != space.size()) {
    throw ValidationError("model arity does not match search space");
  }

  detail::UnitRng rng(rng_seed);
  std::vector<UnitPoint> candidates(static_cast<std::size_t>(options.n_candidates));
  std::vector<double> values(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    UnitPoint point(space.size());
    for (auto& coord : point) coord = rng.next_unit();
    values[i] = detail::acquisition_at(model, point, kappa);
    candidates[i] = std::move(point);
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t starts =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(options.refine_starts, 1)),
                            candidates.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (values[a] != values[b]) return values[a] < values[b];
                      return a < b;  // seeded order breaks ties
                    });

  UnitPoint best_point = candidates[order[0]];
  double best_value = values[order[0]];
  for (std::size_t s = 0; s < starts; ++s) {
    UnitPoint point = candidates[order[s]];
    double value = values[order[s]];
    detail::refine_pass(model, kappa, options.golden_steps, point, value);
    if (value < best_value) {
      best_value = value;
      best_point = point;
    }
  }
  if (options.lattice > 0.0) {
    for (auto& coord : best_point) {
      coord = std::clamp(std::round(coord / options.lattice) * options.lattice, 0.0, 1.0);
    }
  }
  return decode(space, best_point);
}

inline ParamVector propose(const GPModel& model, const SearchSpace& space, double kappa,
                           std::uint64_t rng_seed, int n_candidates) {
  ProposeOptions options;
  options.n_candidates = n_candidates;
  return propose(model, space, kappa, rng_seed, options);
}

/// Optional duplicate handling: when the proposal decodes to a configuration
/// already in the pool, step outward on a per-dimension grid (integer dims
/// by whole steps, real dims by 1/100 of the encoded range) until an
/// unexplored neighbor appears. Duplicates are otherwise legitimate; the
/// study loop records them as-is unless this mode is switched on.
inline ParamVector perturb_duplicate(const SearchSpace& space, const ParamVector& proposal,
                                     const std::vector<ParamVector>& existing) {
  const bool is_duplicate =
      std::find(existing.begin(), existing.end(), proposal) != existing.end();
  if (!is_duplicate) return proposal;

  const UnitPoint base = encode(space, proposal);
  std::vector<double> step(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& dim = space.dimensions()[i];
    step[i] = dim.kind == DimensionKind::integer ? 1.0 / (dim.high - dim.low) : 0.01;
  }
  for (int ring = 1; ring <= 200; ++ring) {
    for (std::size_t i = 0; i < space.size(); ++i) {
      for (double sign : {+1.0, -1.0}) {
        const double coord = base[i] + sign * ring * step[i];
        if (coord < 0.0 || coord > 1.0) continue;
        UnitPoint shifted = base;
        shifted[i] = coord;
        ParamVector neighbor = decode(space, shifted);
        if (std::find(existing.begin(), existing.end(), neighbor) == existing.end()) {
          return neighbor;
        }
      }
    }
  }
  return proposal;  // space exhausted around the point; keep the duplicate
}

}  // namespace earlybo
