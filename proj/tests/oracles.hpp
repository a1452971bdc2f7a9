// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent dense linear-algebra oracle for checking the GP surrogate.
// Deliberately naive: hand-rolled Gaussian elimination and LU determinant,
// its own kernel arithmetic, no Eigen anywhere. Test-only code.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "earlybo/gp.hpp"
#include "earlybo/search_space.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using Vector = std::vector<double>;

inline double kernel_value(const earlybo::KernelConfig& k, const earlybo::UnitPoint& a,
                           const earlybo::UnitPoint& b) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / k.length_scales[i];
    r2 += d * d;
  }
  if (k.family == earlybo::KernelFamily::squared_exponential) {
    return k.signal_variance * std::exp(-0.5 * r2);
  }
  const double r = std::sqrt(r2);
  return k.signal_variance * (1.0 + std::sqrt(5.0) * r + 5.0 / 3.0 * r2) *
         std::exp(-std::sqrt(5.0) * r);
}

inline Matrix gram_matrix(const std::vector<earlybo::UnitPoint>& points,
                          const earlybo::KernelConfig& kernel, double diagonal_add) {
  const std::size_t n = points.size();
  Matrix gram(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      gram[i][j] = kernel_value(kernel, points[i], points[j]);
    }
    gram[i][i] += diagonal_add;
  }
  return gram;
}

/// Gaussian elimination with partial pivoting.
inline Vector solve(Matrix a, Vector b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0.0) throw std::runtime_error("oracle: singular matrix");
    for (std::size_t row = col + 1; row < n; ++row) {
      const double factor = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
      b[row] -= factor * b[col];
    }
  }
  Vector x(n, 0.0);
  for (std::size_t row = n; row-- > 0;) {
    double sum = b[row];
    for (std::size_t k = row + 1; k < n; ++k) sum -= a[row][k] * x[k];
    x[row] = sum / a[row][row];
  }
  return x;
}

/// Determinant via LU with partial pivoting (product of pivots).
inline double determinant(Matrix a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (pivot != col) {
      std::swap(a[col], a[pivot]);
      det = -det;
    }
    if (a[col][col] == 0.0) return 0.0;
    det *= a[col][col];
    for (std::size_t row = col + 1; row < n; ++row) {
      const double factor = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
    }
  }
  return det;
}

struct GpPrediction {
  double mean = 0.0;
  double std_dev = 0.0;
};

/// Replays the full fit/predict contract: standardize targets, solve the
/// dense system, destandardize. Mirrors the documented behavior, not the
/// implementation.
inline GpPrediction predict(const std::vector<earlybo::UnitPoint>& points, const Vector& y,
                            const earlybo::KernelConfig& kernel,
                            const earlybo::UnitPoint& query, bool standardize = true) {
  const std::size_t n = points.size();
  double mean_y = 0.0;
  for (double v : y) mean_y += v;
  mean_y /= static_cast<double>(n);
  double var_y = 0.0;
  for (double v : y) var_y += (v - mean_y) * (v - mean_y);
  var_y /= static_cast<double>(n);
  double shift = 0.0, scale = 1.0;
  if (standardize) {
    shift = mean_y;
    scale = (n > 1 && var_y >= 1e-12) ? std::sqrt(var_y) : 1.0;
  }
  Vector y_std(n);
  for (std::size_t i = 0; i < n; ++i) y_std[i] = (y[i] - shift) / scale;

  const Matrix gram = gram_matrix(points, kernel, kernel.noise_variance + kernel.jitter);
  const Vector alpha = solve(gram, y_std);
  Vector k_star(n);
  for (std::size_t i = 0; i < n; ++i) k_star[i] = kernel_value(kernel, points[i], query);

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += k_star[i] * alpha[i];
  const Vector v = solve(gram, k_star);
  double reduction = 0.0;
  for (std::size_t i = 0; i < n; ++i) reduction += k_star[i] * v[i];
  double variance = kernel.signal_variance - reduction;
  if (variance < 0.0) variance = 0.0;
  return {mean * scale + shift, std::sqrt(variance) * scale};
}

/// Log marginal likelihood of the standardized targets via the determinant.
inline double log_marginal_likelihood(const std::vector<earlybo::UnitPoint>& points,
                                      const Vector& y, const earlybo::KernelConfig& kernel,
                                      bool standardize = true) {
  const std::size_t n = points.size();
  double mean_y = 0.0;
  for (double v : y) mean_y += v;
  mean_y /= static_cast<double>(n);
  double var_y = 0.0;
  for (double v : y) var_y += (v - mean_y) * (v - mean_y);
  var_y /= static_cast<double>(n);
  double shift = 0.0, scale = 1.0;
  if (standardize) {
    shift = mean_y;
    scale = (n > 1 && var_y >= 1e-12) ? std::sqrt(var_y) : 1.0;
  }
  Vector y_std(n);
  for (std::size_t i = 0; i < n; ++i) y_std[i] = (y[i] - shift) / scale;

  const Matrix gram = gram_matrix(points, kernel, kernel.noise_variance + kernel.jitter);
  const Vector alpha = solve(gram, y_std);
  double fit_term = 0.0;
  for (std::size_t i = 0; i < n; ++i) fit_term += y_std[i] * alpha[i];
  return -0.5 * fit_term - 0.5 * std::log(determinant(gram)) -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

}  // namespace oracle
