// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// The append-only pool of trial results and its on-disk form: one complete
// trial record per line. A later line for the same trial id supersedes the
// earlier one, which is how late-phase results land without rewriting the
// file.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "earlybo/error.hpp"
#include "earlybo/trial.hpp"

namespace earlybo {

struct PoolMetadata {
  std::string config_digest;
  std::map<int, std::vector<std::string>> target_chains;
};

namespace detail {

inline nlohmann::json params_to_json(const ParamVector& p) {
  return {
      {"lora_target_index", p.lora_target_index},
      {"learning_rate", p.learning_rate},
      {"batch_size", p.batch_size},
      {"lora_rank", p.lora_rank},
      {"lora_alpha", p.lora_alpha},
      {"lora_dropout", p.lora_dropout},
  };
}

inline ParamVector params_from_json(const nlohmann::json& j) {
  ParamVector p;
  p.lora_target_index = j.at("lora_target_index").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.batch_size = j.at("batch_size").get<int>();
  p.lora_rank = j.at("lora_rank").get<int>();
  p.lora_alpha = j.at("lora_alpha").get<double>();
  p.lora_dropout = j.at("lora_dropout").get<double>();
  return p;
}

inline nlohmann::json phase_to_json(const PhaseResult& r) {
  nlohmann::json j = {
      {"status", to_string(r.status)},
      {"accuracy", r.accuracy},
  };
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& sample : r.loss_curve) {
    curve.push_back({sample.epoch_fraction, sample.value});
  }
  j["loss_curve"] = std::move(curve);
  if (!r.checkpoint_ref.empty()) j["checkpoint"] = r.checkpoint_ref;
  if (!r.per_attribute.empty()) j["per_attribute"] = r.per_attribute;
  return j;
}

inline PhaseResult phase_from_json(const nlohmann::json& j, Phase phase) {
  PhaseResult r;
  r.phase = phase;
  r.status = phase_status_from_string(j.at("status").get<std::string>());
  r.accuracy = j.at("accuracy").get<double>();
  for (const auto& sample : j.at("loss_curve")) {
    r.loss_curve.push_back({sample.at(0).get<double>(), sample.at(1).get<double>()});
  }
  if (j.contains("checkpoint")) r.checkpoint_ref = j["checkpoint"].get<std::string>();
  if (j.contains("per_attribute")) {
    for (const auto& [name, value] : j["per_attribute"].items()) {
      r.per_attribute[name] = value.get<double>();
    }
  }
  return r;
}

}  // namespace detail

inline nlohmann::json record_to_json(const TrialRecord& record) {
  nlohmann::json j = {
      {"trial_id", record.config.trial_id},
      {"origin", to_string(record.origin)},
      {"params", detail::params_to_json(record.config.params)},
      {"seed", record.config.seed},
      {"n_samples", record.config.n_samples},
      {"n_epochs", record.config.n_epochs},
      {"t1", record.config.t1},
      {"t2", record.config.t2},
      {"early", detail::phase_to_json(record.early)},
  };
  if (record.late) j["late"] = detail::phase_to_json(*record.late);
  if (record.minima_accuracy) j["minima_accuracy"] = *record.minima_accuracy;
  if (record.kappa_used) j["kappa_used"] = *record.kappa_used;
  if (record.pool_size_at_proposal) j["pool_size_at_proposal"] = *record.pool_size_at_proposal;
  if (!record.started_at.empty()) j["started_at"] = record.started_at;
  if (!record.finished_at.empty()) j["finished_at"] = record.finished_at;
  return j;
}

inline TrialRecord record_from_json(const nlohmann::json& j) {
  TrialRecord record;
  record.config.trial_id = j.at("trial_id").get<int>();
  record.origin = trial_origin_from_string(j.at("origin").get<std::string>());
  record.config.params = detail::params_from_json(j.at("params"));
  record.config.seed = j.at("seed").get<std::uint64_t>();
  record.config.n_samples = j.at("n_samples").get<std::int64_t>();
  record.config.n_epochs = j.at("n_epochs").get<int>();
  record.config.t1 = j.at("t1").get<double>();
  record.config.t2 = j.at("t2").get<double>();
  record.early = detail::phase_from_json(j.at("early"), Phase::early);
  if (j.contains("late")) record.late = detail::phase_from_json(j["late"], Phase::late);
  if (j.contains("minima_accuracy")) record.minima_accuracy = j["minima_accuracy"].get<double>();
  if (j.contains("kappa_used")) record.kappa_used = j["kappa_used"].get<double>();
  if (j.contains("pool_size_at_proposal")) {
    record.pool_size_at_proposal = j["pool_size_at_proposal"].get<int>();
  }
  if (j.contains("started_at")) record.started_at = j["started_at"].get<std::string>();
  if (j.contains("finished_at")) record.finished_at = j["finished_at"].get<std::string>();
  return record;
}

/// In-memory pool keyed by trial id. Ids are unique and, once a study
/// completes, dense from 0. Iteration order is id order.
class ResultPool {
 public:
  ResultPool() = default;
  explicit ResultPool(PoolMetadata metadata) : metadata_(std::move(metadata)) {}

  /// Adds a brand-new trial. With parallel workers trials may finish out of
  /// id order, so only uniqueness is enforced here.
  void append(TrialRecord record) {
    const int id = record.config.trial_id;
    if (records_.count(id) != 0) {
      throw StudyError("duplicate trial id " + std::to_string(id) + " appended to pool");
    }
    if (record.early.accuracy < 0.0 || record.early.accuracy > 1.0) {
      throw StudyError("trial accuracy outside [0, 1]");
    }
    records_.emplace(id, std::move(record));
  }

  /// Replaces an existing trial's record (late phase / minima updates).
  void update(TrialRecord record) {
    const int id = record.config.trial_id;
    auto it = records_.find(id);
    if (it == records_.end()) {
      throw StudyError("pool update for unknown trial " + std::to_string(id));
    }
    it->second = std::move(record);
  }

  [[nodiscard]] const std::map<int, TrialRecord>& records() const { return records_; }
  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] bool empty() const { return records_.empty(); }
  [[nodiscard]] bool contains(int trial_id) const { return records_.count(trial_id) != 0; }

  [[nodiscard]] const TrialRecord& at(int trial_id) const {
    auto it = records_.find(trial_id);
    if (it == records_.end()) {
      throw ValidationError("unknown trial id " + std::to_string(trial_id));
    }
    return it->second;
  }

  [[nodiscard]] std::vector<TrialRecord> snapshot() const {
    std::vector<TrialRecord> out;
    out.reserve(records_.size());
    for (const auto& [id, record] : records_) out.push_back(record);
    return out;
  }

  [[nodiscard]] const PoolMetadata& metadata() const { return metadata_; }
  void set_metadata(PoolMetadata metadata) { metadata_ = std::move(metadata); }

 private:
  std::map<int, TrialRecord> records_;
  PoolMetadata metadata_;
};

/// Appends one record line to the pool file.
inline void append_pool_line(const std::filesystem::path& path, const TrialRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw StudyError("cannot open pool file for append: " + path.string());
  out << record_to_json(record).dump() << "\n";
  out.flush();
}

/// Strict pool load: every line must be a complete record; a later line for
/// a trial id supersedes the earlier one. Errors name the offending line.
inline ResultPool load_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pool file: " + path.string());
  std::map<int, TrialRecord> by_id;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      throw DataError("pool file " + path.string() + " line " +
                      std::to_string(line_number) + ": blank line");
    }
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw DataError("pool file " + path.string() + " line " +
                      std::to_string(line_number) + ": unparseable record");
    }
    try {
      TrialRecord record = record_from_json(j);
      by_id[record.config.trial_id] = std::move(record);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("pool file " + path.string() + " line " +
                      std::to_string(line_number) + ": " + e.what());
    }
  }
  ResultPool pool;
  int expected = 0;
  for (auto& [id, record] : by_id) {
    if (id != expected++) {
      throw DataError("pool file " + path.string() + ": trial ids are not dense at " +
                      std::to_string(id));
    }
    pool.append(std::move(record));
  }
  return pool;
}

}  // namespace earlybo
