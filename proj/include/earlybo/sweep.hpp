// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-efficiency sweep: fixed hyperparameters, varying training-set
// sizes, each trained to completion and evaluated, plus the saturation
// analysis (smallest size within epsilon of the best average).

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "earlybo/error.hpp"
#include "earlybo/metrics.hpp"
#include "earlybo/trainer.hpp"
#include "earlybo/trial.hpp"

namespace earlybo {

struct SweepConfig {
  /// Strictly increasing sample counts; 0 means the untrained baseline.
  std::vector<std::int64_t> sizes = default_sizes();
  /// Fixed training hyperparameters for every size.
  ParamVector fixed_params{0, 1e-4, 16, 16, 32.0, 0.1};
  int n_epochs = 12;
  TrainerSpec trainer;
  std::uint64_t seed = 0;
  int workers = 1;
  double epsilon = 0.0;  // saturation tolerance

  static std::vector<std::int64_t> default_sizes() {
    std::vector<std::int64_t> sizes = {0, 200, 500};
    for (std::int64_t n = 1000; n <= 10000; n += 500) sizes.push_back(n);
    return sizes;
  }

  void validate() const {
    if (sizes.empty()) throw ValidationError("sweep requires at least one size");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] < 0) throw ValidationError("sweep sizes must be non-negative");
      if (i > 0 && sizes[i] <= sizes[i - 1]) {
        throw ValidationError("sweep sizes must be strictly increasing");
      }
    }
    if (n_epochs < 1) throw ValidationError("n_epochs must be >= 1");
    if (workers < 1) throw ValidationError("workers must be >= 1");
    if (epsilon < 0.0) throw ValidationError("epsilon must be >= 0");
    trainer.validate();
  }
};

struct SweepRow {
  std::int64_t size = 0;
  bool failed = false;
  std::string failure_detail;
  EvalReport report;
};

struct SaturationPoint {
  std::int64_t size = 0;
  double accuracy = 0.0;
  double epsilon = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // one per requested size, in size order
  std::optional<SaturationPoint> saturation;
};

/// Smallest size whose average is within epsilon of the maximum average.
/// Independent of input order.
inline std::pair<std::int64_t, double> saturation_point(
    const std::vector<std::pair<std::int64_t, double>>& rows, double epsilon) {
  if (rows.empty()) throw ValidationError("saturation_point needs at least one row");
  if (epsilon < 0.0) throw ValidationError("epsilon must be >= 0");
  double best = rows.front().second;
  for (const auto& [size, accuracy] : rows) best = std::max(best, accuracy);
  std::optional<std::pair<std::int64_t, double>> chosen;
  for (const auto& [size, accuracy] : rows) {
    if (accuracy >= best - epsilon && (!chosen || size < chosen->first)) {
      chosen = {size, accuracy};
    }
  }
  return *chosen;
}

/// Trains each size to completion (single phase, t = 1.0) and evaluates it;
/// size 0 asks the trainer to score the unadapted baseline. A failing size
/// marks its row and the sweep continues.
inline SweepReport run_sweep(const SweepConfig& config,
                             const std::filesystem::path& directory = {}) {
  config.validate();
  TrainerSpec spec = config.trainer;
  if (spec.type == TrainerSpec::Type::builtin_synthetic) spec.noise_seed = config.seed;
  auto trainer = make_trainer(spec);
  trainer->preflight();
  if (config.trainer.type == TrainerSpec::Type::external && directory.empty()) {
    throw ValidationError("external trainers require a sweep directory");
  }

  SweepReport report;
  report.rows.resize(config.sizes.size());
  std::mutex rows_mutex;

  auto run_row = [&](std::size_t index) {
    const std::int64_t size = config.sizes[index];
    TrialConfig trial;
    trial.trial_id = static_cast<int>(index);
    trial.params = config.fixed_params;
    trial.seed = config.seed;
    trial.n_samples = size;
    trial.n_epochs = config.n_epochs;
    trial.t1 = 1.0;  // single full-length phase
    trial.t2 = 1.0;

    PhaseRequest request{trial, Phase::early, TrainerMode::sweep, 0.0,
                         directory.empty()
                             ? std::string{}
                             : (directory / ("size_" + std::to_string(size))).string()};
    TrainerResult outcome = trainer->run(request);

    SweepRow row;
    row.size = size;
    if (outcome.status != PhaseStatus::ok) {
      row.failed = true;
      row.failure_detail = outcome.detail.empty() ? to_string(outcome.status) : outcome.detail;
    } else if (!outcome.per_attribute.empty()) {
      std::vector<std::optional<double>> accuracies;
      for (const auto& [name, value] : outcome.per_attribute) {
        AttributeAccuracy acc;
        acc.accuracy = value;
        row.report.per_attribute[attribute_from_string(name)] = acc;
        accuracies.push_back(value);
      }
      row.report.average = average_accuracy(accuracies);
    } else {
      // Trainer reported only the scalar objective.
      row.report.average = outcome.accuracy;
    }
    std::lock_guard<std::mutex> guard(rows_mutex);
    report.rows[index] = std::move(row);
  };

  if (config.workers == 1 || config.sizes.size() == 1) {
    for (std::size_t i = 0; i < config.sizes.size(); ++i) run_row(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto body = [&] {
      while (true) {
        const std::size_t index = next.fetch_add(1);
        if (index >= config.sizes.size()) break;
        run_row(index);
      }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(config.workers), config.sizes.size());
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(body);
    for (auto& thread : threads) thread.join();
  }

  std::vector<std::pair<std::int64_t, double>> averages;
  for (const auto& row : report.rows) {
    if (!row.failed && row.report.average.has_value()) {
      averages.push_back({row.size, *row.report.average});
    }
  }
  if (!averages.empty()) {
    const auto [size, accuracy] = saturation_point(averages, config.epsilon);
    report.saturation = SaturationPoint{size, accuracy, config.epsilon};
  }
  return report;
}

/// One row per size, eight attribute columns plus the average, matching the
/// published accuracy-by-size table layout.
inline std::string sweep_table_tsv(const SweepReport& report) {
  std::ostringstream out;
  out << "Number of Samples";
  for (Attribute attribute : kAllAttributes) out << "\t" << display_name(attribute);
  out << "\tAverage\n";
  auto cell = [](std::optional<double> value) {
    if (!value) return std::string("-");
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3f", *value);
    return std::string(buffer);
  };
  for (const auto& row : report.rows) {
    out << row.size;
    if (row.failed) {
      for (int i = 0; i < 9; ++i) out << "\tfailed";
      out << "\n";
      continue;
    }
    for (Attribute attribute : kAllAttributes) {
      const auto it = row.report.per_attribute.find(attribute);
      out << "\t"
          << cell(it == row.report.per_attribute.end() ? std::nullopt : it->second.accuracy);
    }
    out << "\t" << cell(row.report.average) << "\n";
  }
  return out.str();
}

}  // namespace earlybo
