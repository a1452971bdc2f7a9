// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion. Fixture criteria
// reproduce published numbers; property criteria run seeded synthetic
// studies end to end. Exit code 0 only when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "earlybo/acquisition.hpp"
#include "earlybo/detail/rng.hpp"
#include "earlybo/executor.hpp"
#include "earlybo/gp.hpp"
#include "earlybo/metrics.hpp"
#include "earlybo/report.hpp"
#include "earlybo/study.hpp"
#include "earlybo/sweep.hpp"
#include "earlybo/synthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace earlybo;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---------------------------------------------------------------------------
// Criterion 1: published size-table averages reproduce to +/- 0.001.
// ---------------------------------------------------------------------------
Check criterion_1() {
  Check check;
  for (const auto& row : fixtures::accuracy_by_size()) {
    std::vector<std::optional<double>> accuracies(row.attributes.begin(),
                                                  row.attributes.end());
    const double average = average_accuracy(accuracies);
    check.expect(std::abs(average - row.published_average) <= 0.001,
                 "size " + std::to_string(row.size) + ": computed " +
                     std::to_string(average) + " vs published " +
                     std::to_string(row.published_average));
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 2: saturation on the published averages is (6500, 0.939).
// ---------------------------------------------------------------------------
Check criterion_2() {
  Check check;
  std::vector<std::pair<std::int64_t, double>> rows;
  for (const auto& row : fixtures::accuracy_by_size()) {
    rows.push_back({row.size, row.published_average});
  }
  const auto [size, accuracy] = saturation_point(rows, 0.0);
  check.expect(size == 6500, "saturation size " + std::to_string(size));
  check.expect(std::abs(accuracy - 0.939) <= 1e-12,
               "saturation accuracy " + std::to_string(accuracy));
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 3: published ranking fixture: top-5 columns and overlap 4.
// ---------------------------------------------------------------------------
Check criterion_3() {
  Check check;
  const auto pool = fixtures::ranking_fixture_pool();
  const RankTable table = rank_table(pool, 5);
  auto ids = [](const std::vector<RankEntry>& column) {
    std::vector<int> out;
    for (const auto& entry : column) out.push_back(entry.trial_id);
    return out;
  };
  check.expect(ids(table.t1) == std::vector<int>{4, 30, 33, 31, 32}, "t1 top-5 mismatch");
  check.expect(ids(table.t2) == std::vector<int>{30, 33, 32, 39, 31}, "t2 top-5 mismatch");
  check.expect(top_k_overlap(table.t1, table.t2, 5) == 4, "overlap(t1, t2) != 4");
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 4: GP predictions and log marginal likelihood match the dense
// oracle; the single-point closed form holds to 1e-9.
// ---------------------------------------------------------------------------
Check criterion_4() {
  Check check;

  KernelConfig closed_form;
  closed_form.family = KernelFamily::squared_exponential;
  closed_form.length_scales = {1.0};
  closed_form.signal_variance = 1.0;
  closed_form.noise_variance = 0.0;
  closed_form.jitter = 1e-13;
  const GPModel single =
      fit_gp({{0.0}}, {1.0}, closed_form, /*optimize_hypers=*/false, /*standardize=*/false);
  const auto [mean, std_dev] = single.predict({1.0});
  check.expect(std::abs(mean - 0.6065306597126334) <= 1e-9, "closed-form mean");
  check.expect(std::abs(std_dev - 0.7950600976206501) <= 1e-9, "closed-form std");

  for (int seed = 0; seed < 20; ++seed) {
    detail::UnitRng rng(900 + static_cast<std::uint64_t>(seed));
    const std::size_t n = 2 + static_cast<std::size_t>(rng.next_unit() * 4.999);
    std::vector<UnitPoint> points(n, UnitPoint(2));
    std::vector<double> y;
    for (auto& point : points) {
      point[0] = rng.next_unit();
      point[1] = rng.next_unit();
      y.push_back(std::sin(6.0 * point[0]) + point[1] * point[1] + 0.1 * rng.next_unit());
    }
    KernelConfig kernel;
    kernel.family =
        seed % 2 == 0 ? KernelFamily::matern52 : KernelFamily::squared_exponential;
    kernel.length_scales = {0.3 + rng.next_unit(), 0.3 + rng.next_unit()};
    kernel.signal_variance = 0.5 + rng.next_unit();
    kernel.noise_variance = 1e-6;
    kernel.jitter = 1e-13;

    const GPModel model = fit_gp(points, y, kernel, false);
    check.expect(std::abs(model.log_marginal_likelihood() -
                          oracle::log_marginal_likelihood(points, y, model.kernel())) <= 1e-6,
                 "lml mismatch at seed " + std::to_string(seed));
    for (int q = 0; q < 3; ++q) {
      const UnitPoint query = {rng.next_unit(), rng.next_unit()};
      const auto [m, s] = model.predict(query);
      const auto expected = oracle::predict(points, y, model.kernel(), query);
      check.expect(std::abs(m - expected.mean) <= 1e-6,
                   "mean mismatch at seed " + std::to_string(seed));
      check.expect(std::abs(s - expected.std_dev) <= 1e-6,
                   "std mismatch at seed " + std::to_string(seed));
    }
    const auto [m0, s0] = model.predict(points[0]);
    const auto expected0 = oracle::predict(points, y, model.kernel(), points[0]);
    check.expect(std::abs(m0 - expected0.mean) <= 1e-6, "training-point mean mismatch");
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 5: the proposal search never loses to an exhaustive 101x101
// grid by more than 1e-6, for kappa in {0, 1, 5}.
// ---------------------------------------------------------------------------
Check criterion_5() {
  Check check;
  const SearchSpace space({
      {"learning_rate", DimensionKind::log_real, 0.00001, 0.01},
      {"lora_dropout", DimensionKind::real, 0.1, 0.8},
  });
  detail::UnitRng rng(777);
  std::vector<UnitPoint> points;
  std::vector<double> y;
  for (int i = 0; i < 12; ++i) {
    UnitPoint p = {rng.next_unit(), rng.next_unit()};
    y.push_back(-(0.5 + 0.4 * std::exp(-8.0 * ((p[0] - 0.35) * (p[0] - 0.35) +
                                               (p[1] - 0.65) * (p[1] - 0.65)))) +
                0.02 * rng.next_unit());
    points.push_back(std::move(p));
  }
  KernelConfig kernel;
  kernel.length_scales = {0.4, 0.4};
  kernel.noise_variance = 1e-6;
  const GPModel model = fit_gp(points, y, kernel, false);

  for (double kappa : {0.0, 1.0, 5.0}) {
    const ParamVector proposal = propose(model, space, kappa, 4242, ProposeOptions{});
    const UnitPoint proposed = encode(space, proposal);
    const auto [mean, std_dev] = model.predict(proposed);
    const double proposed_lcb = lcb(mean, std_dev, kappa);

    double grid_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; j <= 100; ++j) {
        const UnitPoint g = {i / 100.0, j / 100.0};
        const auto [gm, gs] = model.predict(g);
        grid_min = std::min(grid_min, lcb(gm, gs, kappa));
      }
    }
    check.expect(proposed_lcb <= grid_min + 1e-6,
                 "kappa " + std::to_string(kappa) + ": propose " +
                     std::to_string(proposed_lcb) + " vs grid " + std::to_string(grid_min));
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 6: structural contract of a full seeded study, plus
// byte-identical rerun.
// ---------------------------------------------------------------------------
StudyConfig acceptance_study_config(std::uint64_t seed) {
  StudyConfig config;
  config.iterations = 60;
  config.n_initial_random = 8;
  config.top_k = 5;
  config.master_seed = seed;
  config.trainer.type = TrainerSpec::Type::builtin_synthetic;
  config.trainer.noise = true;
  return config;
}

Check criterion_6() {
  Check check;
  fixtures::ScratchDir scratch("acceptance6");
  const StudyConfig config = acceptance_study_config(2026);

  Study first(config, scratch.path() / "a");
  const StudyReport report = first.run();

  check.expect(report.records.size() == 60, "expected 60 early records");
  int late_count = 0;
  for (const auto& record : report.records) {
    if (record.late.has_value()) ++late_count;
    const int id = record.config.trial_id;
    if (id < 8) {
      check.expect(record.origin == TrialOrigin::random_init, "origin of initial trials");
      check.expect(!record.kappa_used.has_value(), "initial trials carry no kappa");
    } else {
      check.expect(record.origin == TrialOrigin::proposed, "origin of proposed trials");
      const double expected_kappa = (id + 1) <= 30 ? 5.0 : 1.0;
      check.expect(record.kappa_used.has_value() && *record.kappa_used == expected_kappa,
                   "kappa at trial " + std::to_string(id));
    }
  }
  check.expect(late_count == 5, "expected exactly 5 late records, got " +
                                    std::to_string(late_count));

  Study second(config, scratch.path() / "b");
  second.run();
  std::ifstream a(scratch.path() / "a" / "pool.jsonl", std::ios::binary);
  std::ifstream b(scratch.path() / "b" / "pool.jsonl", std::ios::binary);
  std::stringstream a_bytes, b_bytes;
  a_bytes << a.rdbuf();
  b_bytes << b.rdbuf();
  check.expect(!a_bytes.str().empty() && a_bytes.str() == b_bytes.str(),
               "rerun is not byte-identical");
  return check;
}

// ---------------------------------------------------------------------------
// Criteria 7-9 share 20 seeded noisy studies.
// ---------------------------------------------------------------------------
struct StudyOutcome {
  std::uint64_t master_seed = 0;
  StudyReport report;
};

const std::vector<StudyOutcome>& shared_studies() {
  static const std::vector<StudyOutcome> outcomes = [] {
    std::vector<StudyOutcome> result;
    for (int i = 0; i < 20; ++i) {
      const std::uint64_t seed = 5000 + static_cast<std::uint64_t>(i);
      Study study(acceptance_study_config(seed));
      result.push_back({seed, study.run()});
    }
    return result;
  }();
  return outcomes;
}

// Criterion 7: early/late rank agreement across the studies. Late scores
// for all 60 trials come straight from the synthetic curve (the test's
// oracle access); the study itself only continued the top 5.
Check criterion_7() {
  Check check;
  std::vector<double> overlaps, rhos;
  for (const auto& outcome : shared_studies()) {
    std::vector<RankEntry> by_t1, by_t2;
    std::vector<double> t1_ok, t2_ok;
    for (const auto& record : outcome.report.records) {
      // The synthetic noise field is keyed by the study's master seed.
      const double t2_accuracy = synth::fails(record.config.params)
                                     ? 0.0
                                     : synth::accuracy(record.config.params,
                                                       record.config.t2,
                                                       outcome.master_seed, true);
      by_t1.push_back({record.config.trial_id, record.early.accuracy});
      by_t2.push_back({record.config.trial_id, t2_accuracy});
      if (record.early.status == PhaseStatus::ok) {
        t1_ok.push_back(record.early.accuracy);
        t2_ok.push_back(t2_accuracy);
      }
    }
    detail::sort_rank_entries(by_t1);
    detail::sort_rank_entries(by_t2);
    by_t1.resize(5);
    by_t2.resize(5);
    overlaps.push_back(top_k_overlap(by_t1, by_t2, 5));
    const auto rho = spearman_rho(t1_ok, t2_ok);
    check.expect(rho.has_value(), "spearman undefined (constant accuracies)");
    rhos.push_back(rho.value_or(0.0));
  }
  const double median_overlap = median(overlaps);
  const double median_rho = median(rhos);
  check.expect(median_overlap >= 4.0,
               "median top-5 overlap " + std::to_string(median_overlap));
  check.expect(median_rho >= 0.9, "median spearman " + std::to_string(median_rho));
  std::printf("    criterion 7 detail: median overlap %.1f, median rho %.4f\n",
              median_overlap, median_rho);
  return check;
}

// Criterion 8: the exploitation phase avoids the failure region.
Check criterion_8() {
  Check check;
  int exploit_total = 0, exploit_failed = 0, strictly_lower = 0;
  for (const auto& outcome : shared_studies()) {
    int explore_n = 0, explore_f = 0, exploit_n = 0, exploit_f = 0;
    for (const auto& record : outcome.report.records) {
      if (record.origin != TrialOrigin::proposed) continue;
      const bool in_failure_region = synth::fails(record.config.params);
      if (record.config.trial_id + 1 <= 30) {
        ++explore_n;
        explore_f += in_failure_region ? 1 : 0;
      } else {
        ++exploit_n;
        exploit_f += in_failure_region ? 1 : 0;
      }
    }
    exploit_total += exploit_n;
    exploit_failed += exploit_f;
    const double explore_fraction = static_cast<double>(explore_f) / explore_n;
    const double exploit_fraction = static_cast<double>(exploit_f) / exploit_n;
    if (exploit_fraction < explore_fraction) ++strictly_lower;
  }
  const double exploit_fraction = static_cast<double>(exploit_failed) / exploit_total;
  check.expect(exploit_fraction <= 0.15,
               "exploitation failure fraction " + std::to_string(exploit_fraction));
  check.expect(strictly_lower >= 16,
               "exploit < explore in only " + std::to_string(strictly_lower) + "/20");
  std::printf("    criterion 8 detail: exploit fraction %.4f, lower in %d/20\n",
              exploit_fraction, strictly_lower);
  return check;
}

// Criterion 9: the best found asymptotic accuracy is near the global
// optimum computed by a dense-grid oracle.
Check criterion_9() {
  Check check;

  // Grid over the decoded space: 4 x 11 x 6 x 6 x 11 x 6 = 104544 points.
  double grid_best = 0.0;
  const std::array<int, 6> batch_sizes = {1, 2, 4, 8, 16, 32};
  const std::array<int, 6> ranks = {4, 16, 28, 40, 52, 64};
  long evaluated = 0;
  for (int g = 0; g <= 3; ++g) {
    for (int i_lr = 0; i_lr <= 10; ++i_lr) {
      for (int batch : batch_sizes) {
        for (int rank : ranks) {
          for (int i_alpha = 0; i_alpha <= 10; ++i_alpha) {
            for (int i_drop = 0; i_drop <= 5; ++i_drop) {
              ParamVector p;
              p.lora_target_index = g;
              p.learning_rate = std::pow(10.0, -5.0 + 3.0 * i_lr / 10.0);
              p.batch_size = batch;
              p.lora_rank = rank;
              p.lora_alpha = std::pow(10.0, -1.0 + 3.10721 * i_alpha / 10.0);
              p.lora_dropout = 0.1 + 0.7 * i_drop / 5.0;
              ++evaluated;
              grid_best = std::max(grid_best, synth::asymptote(p));
            }
          }
        }
      }
    }
  }
  check.expect(evaluated >= 100000, "oracle grid too small");

  int near_optimal = 0;
  for (const auto& outcome : shared_studies()) {
    if (outcome.report.best_trial_id < 0) continue;
    const double found = synth::asymptote(outcome.report.best_params);
    if (found >= grid_best - 0.02) ++near_optimal;
  }
  check.expect(near_optimal >= 18, "near-optimal in only " + std::to_string(near_optimal) +
                                       "/20 (grid best " + std::to_string(grid_best) + ")");
  std::printf("    criterion 9 detail: grid best %.4f, near-optimal %d/20\n", grid_best,
              near_optimal);
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 10: metric semantics and resume fidelity.
// ---------------------------------------------------------------------------
Check criterion_10() {
  Check check;

  auto record = [](Attribute attribute, const char* truth, const char* predicted) {
    AttributeRecord r;
    r.page_id = "p";
    r.attribute = attribute;
    r.page_class = page_class_of(attribute);
    r.truth_value = truth;
    r.predicted_value = predicted;
    return r;
  };

  // Empty-truth exclusion and the 2/3 hand count.
  std::vector<AttributeRecord> records = {
      record(Attribute::price, "", "hallucinated"),
      record(Attribute::price, "", ""),
      record(Attribute::price, "9.99", "9.99"),
      record(Attribute::price, "5.00", "5.00"),
      record(Attribute::price, "7.50", "wrong"),
  };
  const auto accuracy = attribute_accuracy(records);
  check.expect(accuracy.accuracy.has_value() &&
                   std::abs(*accuracy.accuracy - 2.0 / 3.0) < 1e-12,
               "hand-count example");
  check.expect(accuracy.n_nonempty_truth == 3, "non-empty truth count");

  records[0].predicted_value = "different hallucination";
  const auto unchanged = attribute_accuracy(records);
  check.expect(unchanged.accuracy == accuracy.accuracy, "empty-truth exclusion");

  std::reverse(records.begin(), records.end());
  const auto reversed = attribute_accuracy(records);
  check.expect(reversed.accuracy == accuracy.accuracy, "permutation invariance");

  // Resume fidelity: early + continue equals a single synthetic pass.
  SyntheticTrainer trainer(/*noise=*/true, /*noise_seed=*/321);
  TrialConfig config;
  config.trial_id = 11;
  config.params.lora_target_index = 2;
  config.params.learning_rate = 2e-4;
  config.params.batch_size = 8;
  config.params.lora_rank = 32;
  config.params.lora_alpha = 8.0;
  config.params.lora_dropout = 0.3;
  config.seed = 777;  // per-trial seed; the noise field ignores it
  TrialRecord trial;
  trial.config = config;
  trial.early = run_early(trainer, config);
  check.expect(trial.early.status == PhaseStatus::ok, "reference trial trains");
  trial.late = run_continue(trainer, trial);
  const double direct = synth::accuracy(config.params, config.t2, 321, true);
  check.expect(trial.late->accuracy == direct, "resume fidelity (exact)");
  const double early_direct = synth::accuracy(config.params, config.t1, 321, true);
  check.expect(trial.early.accuracy == early_direct, "early fidelity (exact)");
  return check;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "size-table average reproduction", criterion_1},
      {2, "saturation point reproduction", criterion_2},
      {3, "rank fixture and top-5 overlap", criterion_3},
      {4, "GP oracle equivalence", criterion_4},
      {5, "acquisition brute-force equivalence", criterion_5},
      {6, "study structural contract and determinism", criterion_6},
      {7, "early/late correlation property", criterion_7},
      {8, "failure-region learning property", criterion_8},
      {9, "optimization quality property", criterion_9},
      {10, "metric semantics and resume fidelity", criterion_10},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.run();
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (check.ok) {
      std::printf("PASS criterion %2d: %s (%.2fs)\n", criterion.id, criterion.name, seconds);
    } else {
      std::printf("FAIL criterion %2d: %s (%.2fs) -- %s\n", criterion.id, criterion.name,
                  seconds, check.detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
