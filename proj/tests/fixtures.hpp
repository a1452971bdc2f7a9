// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared test fixtures: the published accuracy-by-size table, the
// published best-model rankings, and a scratch-directory helper.

#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "earlybo/trial.hpp"

namespace fixtures {

struct AccuracyBySizeRow {
  long size;
  // price, description, rating, title, email, facebook, phone, twitter
  std::array<double, 8> attributes;
  double published_average;
};

/// The 22-row accuracy-by-size table (fixed hyperparameters, varying
/// training-set size), including the published Average column.
inline const std::vector<AccuracyBySizeRow>& accuracy_by_size() {
  static const std::vector<AccuracyBySizeRow> rows = {
      {0, {0.709, 0.581, 0.346, 0.699, 0.931, 0.730, 0.786, 0.781}, 0.695},
      {200, {0.942, 0.849, 0.615, 0.957, 0.914, 0.921, 0.857, 0.969}, 0.878},
      {500, {0.872, 0.817, 0.615, 0.860, 0.914, 0.831, 0.839, 0.938}, 0.836},
      {1000, {0.988, 0.892, 0.615, 0.968, 0.983, 0.944, 0.893, 0.969}, 0.906},
      {1500, {0.988, 0.849, 0.615, 0.968, 1.000, 0.876, 0.929, 0.938}, 0.895},
      {2000, {0.965, 0.828, 0.692, 0.957, 0.983, 0.944, 0.946, 0.953}, 0.908},
      {2500, {0.965, 0.806, 0.577, 0.946, 0.931, 0.831, 0.875, 0.906}, 0.855},
      {3000, {0.988, 0.849, 0.654, 0.978, 0.948, 0.910, 0.875, 0.969}, 0.896},
      {3500, {0.953, 0.849, 0.615, 0.946, 0.966, 0.944, 0.929, 0.969}, 0.896},
      {4000, {0.953, 0.860, 0.577, 0.946, 0.966, 0.888, 0.929, 0.938}, 0.882},
      {4500, {0.977, 0.860, 0.615, 0.968, 0.966, 0.933, 0.911, 0.953}, 0.898},
      {5000, {0.965, 0.849, 0.769, 0.946, 0.966, 0.921, 0.893, 0.984}, 0.912},
      {5500, {0.965, 0.817, 0.731, 0.935, 0.983, 0.944, 0.893, 0.969}, 0.905},
      {6000, {0.988, 0.871, 0.692, 0.978, 0.966, 0.966, 0.929, 0.969}, 0.920},
      {6500, {0.988, 0.892, 0.808, 0.978, 0.966, 0.966, 0.911, 1.000}, 0.939},
      {7000, {0.988, 0.903, 0.846, 0.957, 0.983, 0.955, 0.893, 0.984}, 0.939},
      {7500, {0.988, 0.871, 0.846, 0.968, 0.966, 0.955, 0.911, 0.969}, 0.934},
      {8000, {1.000, 0.839, 0.808, 0.978, 0.966, 0.944, 0.875, 0.969}, 0.922},
      {8500, {0.988, 0.914, 0.769, 0.978, 0.966, 0.966, 0.893, 0.969}, 0.930},
      {9000, {1.000, 0.882, 0.808, 0.978, 0.966, 0.966, 0.929, 0.984}, 0.939},
      {9500, {0.965, 0.892, 0.692, 0.978, 0.966, 0.944, 0.875, 0.953}, 0.908},
      {10000, {0.988, 0.839, 0.692, 0.978, 0.966, 0.955, 0.929, 0.953}, 0.912},
  };
  return rows;
}

/// Pool fixture reproducing the published best-model rankings: the known
/// top-10 accuracies at t1 / t2 / loss minima, padded with filler trials
/// strictly below the published values so the rankings are unaffected.
inline std::vector<earlybo::TrialRecord> ranking_fixture_pool() {
  using namespace earlybo;
  const std::map<int, double> t1 = {
      {4, 0.9022},  {30, 0.8962}, {33, 0.8961}, {31, 0.8949}, {32, 0.8894},
      {56, 0.8829}, {29, 0.8741}, {38, 0.8724}, {39, 0.8682}, {40, 0.8674},
  };
  const std::map<int, double> t2 = {
      {30, 0.9196}, {33, 0.9159}, {32, 0.9154}, {39, 0.9138}, {31, 0.9031},
      {37, 0.9030}, {29, 0.9028}, {38, 0.9024}, {40, 0.9015}, {35, 0.8954},
  };
  const std::map<int, double> minima = {
      {56, 0.9222}, {39, 0.9111}, {28, 0.9106}, {30, 0.8948}, {32, 0.8941},
      {15, 0.8934}, {21, 0.8910}, {33, 0.8894}, {38, 0.8864}, {31, 0.8846},
  };
  // Trials continued to t2 in this fixture: every id with published t2 or
  // minima data. Filler values sit below the published ones.
  std::vector<TrialRecord> records;
  for (int id = 0; id < 60; ++id) {
    TrialRecord record;
    record.config.trial_id = id;
    record.early.phase = Phase::early;
    record.early.status = PhaseStatus::ok;
    const auto t1_it = t1.find(id);
    record.early.accuracy = t1_it != t1.end() ? t1_it->second : 0.5 + 0.001 * id;
    const bool continued = t2.count(id) != 0 || minima.count(id) != 0;
    if (continued) {
      PhaseResult late;
      late.phase = Phase::late;
      late.status = PhaseStatus::ok;
      const auto t2_it = t2.find(id);
      late.accuracy = t2_it != t2.end() ? t2_it->second : 0.85 + 0.0001 * id;
      record.late = late;
      const auto min_it = minima.find(id);
      record.minima_accuracy = min_it != minima.end() ? min_it->second : 0.80 + 0.0001 * id;
    }
    records.push_back(std::move(record));
  }
  return records;
}

/// Unique scratch directory under the system temp dir; removed on
/// destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::string pattern =
        (std::filesystem::temp_directory_path() / ("earlybo_" + tag + "_XXXXXX")).string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      throw std::runtime_error("mkdtemp failed");
    }
    path_ = pattern;
  }

  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
