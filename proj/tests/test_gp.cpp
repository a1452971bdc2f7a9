// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "earlybo/detail/rng.hpp"
#include "earlybo/gp.hpp"
#include "oracles.hpp"

using namespace earlybo;

namespace {

KernelConfig se_kernel(std::size_t arity, double noise = 0.0, double jitter = 1e-13) {
  KernelConfig kernel;
  kernel.family = KernelFamily::squared_exponential;
  kernel.length_scales.assign(arity, 1.0);
  kernel.signal_variance = 1.0;
  kernel.noise_variance = noise;
  kernel.jitter = jitter;
  return kernel;
}

std::vector<UnitPoint> random_points(detail::UnitRng& rng, std::size_t n, std::size_t d) {
  std::vector<UnitPoint> points(n, UnitPoint(d));
  for (auto& point : points) {
    for (auto& coord : point) coord = rng.next_unit();
  }
  return points;
}

}  // namespace

TEST_CASE("single noiseless point is interpolated") {
  const std::vector<UnitPoint> points = {{0.3, 0.7}};
  const GPModel model = fit_gp(points, {0.42}, se_kernel(2), /*optimize_hypers=*/false);
  const auto [mean, std_dev] = model.predict(points[0]);
  CHECK(mean == Catch::Approx(0.42).margin(1e-8));
  CHECK(std_dev <= 1e-6);
}

TEST_CASE("fitting zero points is rejected") {
  CHECK_THROWS_AS(fit_gp({}, {}, se_kernel(2), false), ValidationError);
}

TEST_CASE("non-finite objectives are rejected") {
  CHECK_THROWS_AS(
      fit_gp({{0.1}, {0.2}}, {1.0, std::numeric_limits<double>::quiet_NaN()}, se_kernel(1), false),
      ValidationError);
}

TEST_CASE("closed-form single-point posterior") {
  // k(x, x') = exp(-(x - x')^2 / 2), training pair (0, 1), noise 0, raw fit.
  const GPModel model =
      fit_gp({{0.0}}, {1.0}, se_kernel(1), /*optimize_hypers=*/false, /*standardize=*/false);
  const auto [mean, std_dev] = model.predict({1.0});
  CHECK(mean == Catch::Approx(0.6065306597126334).margin(1e-9));
  CHECK(std_dev == Catch::Approx(0.7950600976206501).margin(1e-9));
}

TEST_CASE("prediction at training inputs interpolates with zero noise") {
  detail::UnitRng rng(11);
  const auto points = random_points(rng, 5, 3);
  std::vector<double> y;
  for (const auto& p : points) y.push_back(std::sin(6.0 * p[0]) + p[1] - p[2]);
  const GPModel model = fit_gp(points, y, se_kernel(3), false);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [mean, std_dev] = model.predict(points[i]);
    REQUIRE(mean == Catch::Approx(y[i]).margin(1e-6));
    REQUIRE(std_dev <= 1e-4);
  }
}

TEST_CASE("far from all data the posterior reverts to the prior") {
  const std::vector<UnitPoint> points = {{0.0, 0.0}, {0.1, 0.1}};
  const GPModel model = fit_gp(points, {1.0, 3.0}, se_kernel(2), false);
  const auto [mean, std_dev] = model.predict({1000.0, 1000.0});
  CHECK(mean == Catch::Approx(2.0).margin(1e-9));           // target mean
  CHECK(std_dev == Catch::Approx(model.target_std()).margin(1e-9));  // prior sd, de-standardized
}

TEST_CASE("arity mismatches are rejected") {
  const GPModel model = fit_gp({{0.5, 0.5}}, {1.0}, se_kernel(2), false);
  CHECK_THROWS_AS(model.predict({0.5}), ValidationError);
}

TEST_CASE("predictive mean matches the dense oracle on collinear points") {
  const std::vector<UnitPoint> points = {{0.1}, {0.5}, {0.9}};
  const std::vector<double> y = {0.3, -0.2, 0.4};
  const KernelConfig kernel = se_kernel(1, 1e-6);
  const GPModel model = fit_gp(points, y, kernel, false);
  for (const auto& query : points) {
    const auto [mean, std_dev] = model.predict(query);
    const auto expected = oracle::predict(points, y, model.kernel(), query);
    REQUIRE(mean == Catch::Approx(expected.mean).margin(1e-8));
    REQUIRE(std_dev == Catch::Approx(expected.std_dev).margin(1e-8));
  }
}

TEST_CASE("log marginal likelihood closed form at n=1") {
  const GPModel model = fit_gp({{0.5}}, {0.0}, se_kernel(1), false, false);
  CHECK(model.log_marginal_likelihood() == Catch::Approx(-0.9189385332046727).margin(1e-9));
}

TEST_CASE("log marginal likelihood matches the determinant oracle") {
  detail::UnitRng rng(21);
  const auto points = random_points(rng, 4, 2);
  std::vector<double> y;
  for (const auto& p : points) y.push_back(p[0] * p[0] - p[1]);
  for (KernelFamily family : {KernelFamily::squared_exponential, KernelFamily::matern52}) {
    KernelConfig kernel = se_kernel(2, 1e-6);
    kernel.family = family;
    kernel.length_scales = {0.7, 1.3};
    const GPModel model = fit_gp(points, y, kernel, false);
    const double expected = oracle::log_marginal_likelihood(points, y, model.kernel());
    REQUIRE(model.log_marginal_likelihood() == Catch::Approx(expected).margin(1e-6));
  }
}

TEST_CASE("duplicate points with nonzero noise still factorize") {
  const std::vector<UnitPoint> points = {{0.4}, {0.4}, {0.8}};
  const GPModel model = fit_gp(points, {1.0, 1.1, 2.0}, se_kernel(1, 1e-6), false);
  CHECK(std::isfinite(model.log_marginal_likelihood()));
}

TEST_CASE("posterior variance never exceeds the prior variance") {
  detail::UnitRng rng(33);
  const auto points = random_points(rng, 8, 2);
  std::vector<double> y;
  for (const auto& p : points) y.push_back(p[0] + 2.0 * p[1]);
  const GPModel model = fit_gp(points, y, se_kernel(2, 1e-6), false);
  const double prior_std = std::sqrt(model.kernel().signal_variance) * model.target_std();
  for (int i = 0; i < 200; ++i) {
    const UnitPoint query = {rng.next_unit(), rng.next_unit()};
    const auto [mean, std_dev] = model.predict(query);
    REQUIRE(std_dev <= prior_std + 1e-12);
  }
}

TEST_CASE("predictions are invariant under training-point permutation") {
  detail::UnitRng rng(44);
  const auto points = random_points(rng, 6, 2);
  std::vector<double> y;
  for (const auto& p : points) y.push_back(std::cos(4.0 * p[0]) * p[1]);

  std::vector<UnitPoint> reversed_points(points.rbegin(), points.rend());
  std::vector<double> reversed_y(y.rbegin(), y.rend());

  const GPModel a = fit_gp(points, y, se_kernel(2, 1e-6), false);
  const GPModel b = fit_gp(reversed_points, reversed_y, se_kernel(2, 1e-6), false);
  for (int i = 0; i < 50; ++i) {
    const UnitPoint query = {rng.next_unit(), rng.next_unit()};
    const auto [mean_a, std_a] = a.predict(query);
    const auto [mean_b, std_b] = b.predict(query);
    REQUIRE(mean_a == Catch::Approx(mean_b).margin(1e-10));
    REQUIRE(std_a == Catch::Approx(std_b).margin(1e-10));
  }
}

TEST_CASE("standardization is affine-invariant") {
  detail::UnitRng rng(55);
  const auto points = random_points(rng, 6, 2);
  std::vector<double> y, y_affine;
  const double a = 3.5, b = -2.0;
  for (const auto& p : points) {
    const double v = std::sin(5.0 * p[0]) + p[1];
    y.push_back(v);
    y_affine.push_back(a * v + b);
  }
  const GPModel original = fit_gp(points, y, se_kernel(2, 1e-6), false);
  const GPModel transformed = fit_gp(points, y_affine, se_kernel(2, 1e-6), false);
  for (int i = 0; i < 50; ++i) {
    const UnitPoint query = {rng.next_unit(), rng.next_unit()};
    const auto [mean_o, std_o] = original.predict(query);
    const auto [mean_t, std_t] = transformed.predict(query);
    REQUIRE(mean_t == Catch::Approx(a * mean_o + b).margin(1e-8));
    REQUIRE(std_t == Catch::Approx(a * std_o).margin(1e-8));
  }
}

TEST_CASE("degenerate all-equal targets fit and predict the constant") {
  const std::vector<UnitPoint> points = {{0.1}, {0.5}, {0.9}};
  const GPModel model = fit_gp(points, {0.7, 0.7, 0.7}, se_kernel(1, 1e-6), false);
  const auto [mean_near, std_near] = model.predict({0.5});
  CHECK(mean_near == Catch::Approx(0.7).margin(1e-8));
  const auto [mean_far, std_far] = model.predict({100.0});
  CHECK(mean_far == Catch::Approx(0.7).margin(1e-9));
  CHECK(std_far == Catch::Approx(std::sqrt(model.kernel().signal_variance)).margin(1e-9));
}

TEST_CASE("hyperparameter optimization does not worsen the likelihood") {
  detail::UnitRng rng(66);
  const auto points = random_points(rng, 12, 2);
  std::vector<double> y;
  for (const auto& p : points) y.push_back(std::sin(8.0 * p[0]) + 0.3 * p[1]);
  KernelConfig init = se_kernel(2, 1e-6);
  init.family = KernelFamily::matern52;
  const GPModel fixed = fit_gp(points, y, init, false);
  const GPModel tuned = fit_gp(points, y, init, true);
  CHECK(tuned.log_marginal_likelihood() >= fixed.log_marginal_likelihood() - 1e-9);

  // Deterministic: the same fit twice yields the same kernel.
  const GPModel again = fit_gp(points, y, init, true);
  CHECK(tuned.kernel().length_scales == again.kernel().length_scales);
  CHECK(tuned.kernel().signal_variance == again.kernel().signal_variance);
}
