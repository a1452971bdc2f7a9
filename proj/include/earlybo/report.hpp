// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Analysis views over a pool of trial results: ranked accuracy tables at
// t1 / t2 / loss minima, rank-agreement statistics, the learning-rate x
// alpha failure scatter, loss-curve exports, and hyperparameter tables.
// Everything renders to plain text or delimiter-separated values; figures
// are someone else's job.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "earlybo/error.hpp"
#include "earlybo/metrics.hpp"
#include "earlybo/trial.hpp"

namespace earlybo {

struct RankEntry {
  int trial_id = -1;
  double accuracy = 0.0;
};

/// Three ranked columns: early accuracy over all trials, late and
/// loss-minimum accuracy over the continued trials.
struct RankTable {
  std::vector<RankEntry> t1;
  std::vector<RankEntry> t2;
  std::vector<RankEntry> minima;
};

namespace detail {

inline void sort_rank_entries(std::vector<RankEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.trial_id < b.trial_id;
  });
}

inline std::string fmt_accuracy(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

inline std::string fmt_compact(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

}  // namespace detail

inline RankTable rank_table(const std::vector<TrialRecord>& records, int k) {
  if (k < 1) throw ValidationError("rank table requires k >= 1");
  const bool any_ok = std::any_of(records.begin(), records.end(), [](const TrialRecord& r) {
    return r.early.status == PhaseStatus::ok;
  });
  if (!any_ok) throw ValidationError("rank table needs at least one ok trial");

  RankTable table;
  for (const auto& record : records) {
    table.t1.push_back({record.config.trial_id, record.early.accuracy});
    if (record.late.has_value()) {
      table.t2.push_back({record.config.trial_id, record.late->accuracy});
    }
    if (record.minima_accuracy.has_value()) {
      table.minima.push_back({record.config.trial_id, *record.minima_accuracy});
    }
  }
  detail::sort_rank_entries(table.t1);
  detail::sort_rank_entries(table.t2);
  detail::sort_rank_entries(table.minima);
  const auto cut = [k](std::vector<RankEntry>& column) {
    if (static_cast<int>(column.size()) > k) column.resize(static_cast<std::size_t>(k));
  };
  cut(table.t1);
  cut(table.t2);
  cut(table.minima);
  return table;
}

/// |top-k(a) and top-k(b)| by trial id.
inline int top_k_overlap(const std::vector<RankEntry>& col_a,
                         const std::vector<RankEntry>& col_b, int k) {
  if (k < 0 || k > static_cast<int>(col_a.size()) || k > static_cast<int>(col_b.size())) {
    throw ValidationError("overlap k exceeds a column length");
  }
  int overlap = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (col_a[static_cast<std::size_t>(i)].trial_id ==
          col_b[static_cast<std::size_t>(j)].trial_id) {
        ++overlap;
        break;
      }
    }
  }
  return overlap;
}

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Spearman rank correlation with average ranks for ties; unset when either
/// vector is constant.
inline std::optional<double> spearman_rho(const std::vector<double>& xs,
                                          const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ValidationError("spearman_rho needs two vectors of equal length >= 2");
  }
  const auto rx = detail::average_ranks(xs);
  const auto ry = detail::average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += rx[i];
    mean_y += ry[i];
  }
  mean_x /= n;
  mean_y /= n;
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = rx[i] - mean_x;
    const double dy = ry[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x <= 0.0 || var_y <= 0.0) return std::nullopt;
  return cov / std::sqrt(var_x * var_y);
}

struct ScatterPoint {
  int trial_id = -1;
  double learning_rate = 0.0;
  double lora_alpha = 0.0;
  double accuracy = 0.0;
  bool failed = false;  // zero-accuracy flag
};

/// One (learning rate, alpha, early accuracy) point per trial.
inline std::vector<ScatterPoint> failure_scatter(const std::vector<TrialRecord>& records) {
  std::vector<ScatterPoint> points;
  points.reserve(records.size());
  for (const auto& record : records) {
    points.push_back({record.config.trial_id, record.config.params.learning_rate,
                      record.config.params.lora_alpha, record.early.accuracy,
                      record.early.accuracy == 0.0});
  }
  return points;
}

struct LossCurves {
  std::map<int, std::vector<LossSample>> series;
  std::vector<int> excluded_crashed;
};

/// Per-trial loss series (the full recorded curve). Crashed trials are
/// excluded and listed so the caller can say why a requested id is absent.
inline LossCurves loss_curves(const std::vector<TrialRecord>& records,
                              const std::vector<int>& trial_ids) {
  LossCurves curves;
  for (int id : trial_ids) {
    const auto it = std::find_if(records.begin(), records.end(), [id](const TrialRecord& r) {
      return r.config.trial_id == id;
    });
    if (it == records.end()) {
      throw ValidationError("loss_curves: unknown trial id " + std::to_string(id));
    }
    if (it->early.status == PhaseStatus::crashed) {
      curves.excluded_crashed.push_back(id);
      continue;
    }
    curves.series[id] = it->late.has_value() ? it->late->loss_curve : it->early.loss_curve;
  }
  return curves;
}

struct ParamTableRow {
  int trial_id = -1;
  double accuracy = 0.0;  // early accuracy
  ParamVector params;
};

/// Hyperparameter sets of the top-k trials at t1.
inline std::vector<ParamTableRow> param_table(const std::vector<TrialRecord>& records, int k) {
  std::vector<const TrialRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& record : records) sorted.push_back(&record);
  std::sort(sorted.begin(), sorted.end(), [](const TrialRecord* a, const TrialRecord* b) {
    if (a->early.accuracy != b->early.accuracy) return a->early.accuracy > b->early.accuracy;
    return a->config.trial_id < b->config.trial_id;
  });
  std::vector<ParamTableRow> rows;
  for (const TrialRecord* record : sorted) {
    if (static_cast<int>(rows.size()) >= k) break;
    rows.push_back({record->config.trial_id, record->early.accuracy, record->config.params});
  }
  return rows;
}

/// Accuracy delta between two evaluation reports of the same record file.
struct Comparison {
  std::string label_a;
  double average_a = 0.0;
  std::string label_b;
  double average_b = 0.0;
  double delta = 0.0;  // b - a
};

inline Comparison compare_reports(const std::string& label_a, const EvalReport& a,
                                  const std::string& label_b, const EvalReport& b) {
  if (!a.average.has_value() || !b.average.has_value()) {
    throw ValidationError("comparison requires defined averages on both sides");
  }
  return {label_a, *a.average, label_b, *b.average, *b.average - *a.average};
}

/// Re-evaluation of ranked models on an independent test set: entries keyed
/// by (phase, trial id), loaded from a line-delimited file of
/// {"trial_id": n, "phase": "t1"|"t2"|"minima", "accuracy": x}.
using IndependentScores = std::map<std::pair<std::string, int>, double>;

inline IndependentScores load_independent_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open independent-score file: " + path.string());
  IndependentScores scores;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError("independent-score file line " + std::to_string(line_number) +
                      ": unparseable entry");
    }
    try {
      const std::string phase = j.at("phase").get<std::string>();
      if (phase != "t1" && phase != "t2" && phase != "minima") {
        throw DataError("independent-score file line " + std::to_string(line_number) +
                        ": phase must be t1, t2 or minima");
      }
      scores[{phase, j.at("trial_id").get<int>()}] = j.at("accuracy").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("independent-score file line " + std::to_string(line_number) + ": " +
                      e.what());
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Renderers
// ---------------------------------------------------------------------------

inline std::string render_rank_table(const RankTable& table) {
  std::ostringstream out;
  out << "t1 id   t1 acc   | t2 id   t2 acc   | min id  min acc\n";
  const std::size_t rows = std::max({table.t1.size(), table.t2.size(), table.minima.size()});
  auto cell = [](const std::vector<RankEntry>& column, std::size_t row) {
    char buffer[32];
    if (row < column.size()) {
      std::snprintf(buffer, sizeof(buffer), "%-7d %-8s", column[row].trial_id,
                    detail::fmt_accuracy(column[row].accuracy).c_str());
    } else {
      std::snprintf(buffer, sizeof(buffer), "%-7s %-8s", "-", "-");
    }
    return std::string(buffer);
  };
  for (std::size_t row = 0; row < rows; ++row) {
    out << cell(table.t1, row) << " | " << cell(table.t2, row) << " | "
        << cell(table.minima, row) << "\n";
  }
  return out.str();
}

inline std::string rank_table_tsv(const RankTable& table) {
  std::ostringstream out;
  out << "column\trank\ttrial_id\taccuracy\n";
  auto dump = [&](const char* name, const std::vector<RankEntry>& column) {
    for (std::size_t i = 0; i < column.size(); ++i) {
      out << name << "\t" << (i + 1) << "\t" << column[i].trial_id << "\t"
          << detail::fmt_accuracy(column[i].accuracy) << "\n";
    }
  };
  dump("t1", table.t1);
  dump("t2", table.t2);
  dump("minima", table.minima);
  return out.str();
}

inline std::string scatter_tsv(const std::vector<ScatterPoint>& points) {
  std::ostringstream out;
  out << "trial_id\tlearning_rate\tlora_alpha\taccuracy\tfailed\n";
  for (const auto& p : points) {
    out << p.trial_id << "\t" << detail::fmt_compact(p.learning_rate) << "\t"
        << detail::fmt_compact(p.lora_alpha) << "\t" << detail::fmt_accuracy(p.accuracy)
        << "\t" << (p.failed ? 1 : 0) << "\n";
  }
  return out.str();
}

inline std::string loss_curves_tsv(const LossCurves& curves) {
  std::ostringstream out;
  out << "trial_id\tepoch_fraction\tloss\n";
  for (const auto& [id, series] : curves.series) {
    for (const auto& sample : series) {
      out << id << "\t" << detail::fmt_compact(sample.epoch_fraction) << "\t"
          << detail::fmt_compact(sample.value) << "\n";
    }
  }
  return out.str();
}

inline std::string param_table_tsv(const std::vector<ParamTableRow>& rows) {
  std::ostringstream out;
  out << "trial_id\taccuracy\tlora_target_index\tbatch_size\tlearning_rate\t"
         "lora_alpha\tlora_dropout\tlora_rank\n";
  for (const auto& row : rows) {
    out << row.trial_id << "\t" << detail::fmt_accuracy(row.accuracy) << "\t"
        << row.params.lora_target_index << "\t" << row.params.batch_size << "\t"
        << detail::fmt_compact(row.params.learning_rate) << "\t"
        << detail::fmt_compact(row.params.lora_alpha) << "\t"
        << detail::fmt_compact(row.params.lora_dropout) << "\t" << row.params.lora_rank
        << "\n";
  }
  return out.str();
}

inline std::string render_eval_report(const EvalReport& report) {
  std::ostringstream out;
  out << "attribute            accuracy  n_nonempty_truth\n";
  for (const auto& [attribute, acc] : report.per_attribute) {
    char buffer[80];
    std::snprintf(buffer, sizeof(buffer), "%-20s %-9s %ld\n", to_string(attribute),
                  acc.accuracy ? detail::fmt_accuracy(*acc.accuracy).c_str() : "undefined",
                  acc.n_nonempty_truth);
    out << buffer;
  }
  out << "average              "
      << (report.average ? detail::fmt_accuracy(*report.average) : "undefined") << "\n";
  for (const auto& warning : report.warnings) {
    out << "warning: " << warning << "\n";
  }
  return out.str();
}

}  // namespace earlybo
