// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end study loop: seed the pool with random trials, then alternate
// surrogate fit -> LCB proposal -> early training for the remaining
// iterations, switch kappa at the halfway point, continue the top-k
// configurations to t2, score their loss minima, and return the best late
// configuration. State persists after every trial so an interrupted study
// resumes where it stopped.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "earlybo/acquisition.hpp"
#include "earlybo/error.hpp"
#include "earlybo/executor.hpp"
#include "earlybo/gp.hpp"
#include "earlybo/pool.hpp"
#include "earlybo/search_space.hpp"
#include "earlybo/trainer.hpp"

namespace earlybo {

struct StudyConfig {
  SearchSpace space = default_space();
  int iterations = 60;       // N: total early-phase trials
  int n_initial_random = 8;  // random seeding before proposals start
  int top_k = 5;             // configurations continued to t2
  double t1 = 0.2;
  double t2 = 0.8;
  double kappa_explore = 5.0;
  double kappa_exploit = 1.0;
  std::int64_t n_samples = 1000;
  int n_epochs = 10;
  int workers = 1;
  std::uint64_t master_seed = 0;
  TrainerSpec trainer;
  KernelConfig kernel;  // length scales default to 1 per dimension at fit time
  bool refit_kernel = true;
  ProposeOptions proposal;
  bool dedup_proposals = false;

  [[nodiscard]] KappaSchedule schedule() const {
    return {kappa_explore, kappa_exploit, iterations};
  }

  void validate() const {
    if (iterations < 1) throw ValidationError("iterations must be >= 1");
    if (n_initial_random < 1) throw ValidationError("initial_random must be >= 1");
    if (n_initial_random > iterations) {
      throw ValidationError("initial_random cannot exceed iterations");
    }
    if (top_k < 1) throw ValidationError("top_k must be >= 1");
    if (top_k > iterations) throw ValidationError("top_k cannot exceed iterations");
    if (!(t1 > 0.0 && t1 < t2 && t2 <= 1.0)) {
      throw ValidationError("study requires 0 < t1 < t2 <= 1");
    }
    if (n_samples < 0) throw ValidationError("n_samples must be >= 0");
    if (n_epochs < 1) throw ValidationError("n_epochs must be >= 1");
    if (workers < 1) throw ValidationError("workers must be >= 1");
    if (proposal.n_candidates < 1) throw ValidationError("candidates must be >= 1");
    schedule().validate();
    trainer.validate();
  }
};

struct TopKSelection {
  std::vector<int> ids;  // ranked: best early accuracy first
  std::string warning;   // set when fewer than k ok-status trials exist
};

/// Top k trials by early accuracy among ok-status records, ties broken by
/// lower trial id. Fewer viable records than k yields them all plus a
/// warning.
inline TopKSelection select_top_k(const ResultPool& pool, int k) {
  if (k < 1) throw ValidationError("top-k selection requires k >= 1");
  if (pool.empty()) throw ValidationError("top-k selection on an empty pool");
  TopKSelection selection;
  for (const auto& [id, record] : pool.records()) {
    if (record.early.status == PhaseStatus::ok) selection.ids.push_back(id);
  }
  std::stable_sort(selection.ids.begin(), selection.ids.end(), [&](int a, int b) {
    const double acc_a = pool.at(a).early.accuracy;
    const double acc_b = pool.at(b).early.accuracy;
    if (acc_a != acc_b) return acc_a > acc_b;
    return a < b;
  });
  if (static_cast<int>(selection.ids.size()) > k) {
    selection.ids.resize(static_cast<std::size_t>(k));
  } else if (static_cast<int>(selection.ids.size()) < k) {
    selection.warning = "only " + std::to_string(selection.ids.size()) +
                        " viable trials available for top-" + std::to_string(k) +
                        " selection";
  }
  return selection;
}

struct StudyReport {
  std::vector<TrialRecord> records;
  std::vector<int> top_k_ids;
  std::string selection_warning;
  int best_trial_id = -1;
  ParamVector best_params;
  double best_accuracy = 0.0;
  bool already_complete = false;
};

/// The continued trial with the highest late accuracy (ties: lower id).
inline std::pair<ParamVector, double> best_config(const StudyReport& report) {
  if (report.best_trial_id < 0) {
    throw ValidationError("study report has no continued trials");
  }
  return {report.best_params, report.best_accuracy};
}

namespace detail {

inline std::uint64_t trial_seed(std::uint64_t master_seed, int trial_id) {
  return stable_hash(master_seed, "trial-seed", trial_id);
}

inline std::uint64_t proposal_seed(std::uint64_t master_seed, int iteration) {
  return stable_hash(master_seed, "proposal", iteration);
}

inline std::uint64_t initial_design_seed(std::uint64_t master_seed) {
  return stable_hash(master_seed, "initial-design");
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

/// RAII lock file; one study per directory.
class StudyLock {
 public:
  StudyLock() = default;

  explicit StudyLock(const std::filesystem::path& dir) {
    path_ = dir / "study.lock";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (std::filesystem::exists(path_)) {
      throw StudyError("study directory is locked: " + path_.string() +
                       " exists (remove it if no study is running)");
    }
    std::ofstream out(path_);
    if (!out) throw StudyError("cannot create lock file " + path_.string());
    out << "locked\n";
    held_ = true;
  }

  StudyLock(StudyLock&& other) noexcept { *this = std::move(other); }
  StudyLock& operator=(StudyLock&& other) noexcept {
    release();
    path_ = std::move(other.path_);
    held_ = other.held_;
    other.held_ = false;
    return *this;
  }
  StudyLock(const StudyLock&) = delete;
  StudyLock& operator=(const StudyLock&) = delete;

  ~StudyLock() { release(); }

  void release() {
    if (held_) {
      std::error_code ec;
      std::filesystem::remove(path_, ec);
      held_ = false;
    }
  }

 private:
  std::filesystem::path path_;
  bool held_ = false;
};

}  // namespace detail

/// One study: configuration plus (optionally) a directory holding the
/// persistent pool. Without a directory the study runs in memory, which the
/// synthetic trainer supports; external trainers need the directory for
/// checkpoints.
class Study {
 public:
  explicit Study(StudyConfig config, std::filesystem::path directory = {})
      : config_(std::move(config)), dir_(std::move(directory)) {
    config_.validate();
    if (config_.trainer.type == TrainerSpec::Type::external && dir_.empty()) {
      throw ValidationError("external trainers require a study directory");
    }
  }

  /// Runs the full study loop from scratch. Refuses a directory that
  /// already holds a pool (resume instead).
  StudyReport run() {
    auto trainer = make_trainer(effective_trainer_spec());
    trainer->preflight();
    detail::StudyLock lock;
    if (!dir_.empty()) {
      if (std::filesystem::exists(pool_path())) {
        throw StudyError("study directory already holds a pool; use resume");
      }
      lock = detail::StudyLock(dir_);
      std::filesystem::create_directories(dir_);
    }
    pool_ = ResultPool();
    return execute(*trainer);
  }

  /// Picks up from the persisted pool: missing early trials first, then
  /// missing continuations. A completed study is a no-op.
  StudyReport resume() {
    if (dir_.empty()) throw ValidationError("resume requires a study directory");
    auto trainer = make_trainer(effective_trainer_spec());
    trainer->preflight();
    detail::StudyLock lock(dir_);
    pool_ = load_pool(pool_path());
    if (static_cast<int>(pool_.size()) > config_.iterations) {
      throw DataError("pool holds more trials than the configured iterations");
    }
    const bool was_complete = is_complete();
    StudyReport report = execute(*trainer);
    report.already_complete = was_complete;
    return report;
  }

  [[nodiscard]] const ResultPool& pool() const { return pool_; }
  [[nodiscard]] const StudyConfig& config() const { return config_; }
  [[nodiscard]] std::filesystem::path pool_path() const { return dir_ / "pool.jsonl"; }

 private:
  // The synthetic noise field is seeded by the study, so two studies with
  // different master seeds see different noise realizations.
  [[nodiscard]] TrainerSpec effective_trainer_spec() const {
    TrainerSpec spec = config_.trainer;
    if (spec.type == TrainerSpec::Type::builtin_synthetic) {
      spec.noise_seed = config_.master_seed;
    }
    return spec;
  }

  bool is_complete() {
    if (static_cast<int>(pool_.size()) < config_.iterations) return false;
    const TopKSelection selection = select_top_k(pool_, config_.top_k);
    if (selection.ids.empty()) return true;  // nothing continuable remains
    for (int id : selection.ids) {
      const TrialRecord& record = pool_.at(id);
      if (!record.late.has_value()) return false;
      if (record.late->status == PhaseStatus::ok && !record.minima_accuracy.has_value()) {
        return false;
      }
    }
    return true;
  }

  StudyReport execute(TrainerBinding& trainer) {
    run_initial_phase(trainer);
    run_proposal_phase(trainer);
    const TopKSelection selection = run_continuation_phase(trainer);
    return make_report(selection);
  }

  void run_initial_phase(TrainerBinding& trainer) {
    const auto designs = sample_random(config_.space,
                                       detail::initial_design_seed(config_.master_seed),
                                       static_cast<std::size_t>(config_.n_initial_random));
    std::vector<int> todo;
    for (int id = 0; id < config_.n_initial_random; ++id) {
      if (!pool_.contains(id)) todo.push_back(id);
    }
    parallel_for(todo, [&](int id) {
      TrialRecord record = execute_trial(trainer, id, designs[static_cast<std::size_t>(id)],
                                         TrialOrigin::random_init, std::nullopt, std::nullopt);
      commit_new(std::move(record));
    });
  }

  void run_proposal_phase(TrainerBinding& trainer) {
    std::vector<int> todo;
    for (int id = config_.n_initial_random; id < config_.iterations; ++id) {
      if (!pool_.contains(id)) todo.push_back(id);
    }
    parallel_for(todo, [&](int id) {
      const int iteration = id + 1;  // 1-based, as the schedule counts
      std::vector<UnitPoint> points;
      std::vector<double> objectives;
      std::vector<ParamVector> existing;
      int snapshot_size = 0;
      {
        std::lock_guard<std::mutex> guard(pool_mutex_);
        snapshot_size = static_cast<int>(pool_.size());
        points.reserve(pool_.size());
        objectives.reserve(pool_.size());
        for (const auto& [rid, record] : pool_.records()) {
          points.push_back(encode(config_.space, record.config.params));
          objectives.push_back(-record.early.accuracy);  // surrogate minimizes
          if (config_.dedup_proposals) existing.push_back(record.config.params);
        }
      }
      const GPModel model = fit_gp(points, objectives, config_.kernel, config_.refit_kernel);
      const double kappa = kappa_for_iteration(iteration, config_.schedule());
      ParamVector params =
          propose(model, config_.space, kappa,
                  detail::proposal_seed(config_.master_seed, iteration), config_.proposal);
      if (config_.dedup_proposals) {
        params = perturb_duplicate(config_.space, params, existing);
      }
      TrialRecord record = execute_trial(trainer, id, params, TrialOrigin::proposed, kappa,
                                         snapshot_size);
      commit_new(std::move(record));
    });
  }

  TopKSelection run_continuation_phase(TrainerBinding& trainer) {
    const TopKSelection selection = select_top_k(pool_, config_.top_k);
    if (selection.ids.empty()) {
      throw StudyError("no viable configuration: every trial in the pool failed");
    }
    parallel_for(selection.ids, [&](int id) {
      TrialRecord record;
      {
        std::lock_guard<std::mutex> guard(pool_mutex_);
        record = pool_.at(id);
      }
      bool changed = false;
      if (!record.late.has_value()) {
        if (trainer.records_wall_clock()) record.started_at = detail::utc_timestamp();
        record.late = run_continue(trainer, record);
        changed = true;
      }
      if (record.late->status == PhaseStatus::ok && !record.minima_accuracy.has_value() &&
          !record.late->loss_curve.empty()) {
        record.minima_accuracy = minima_accuracy(record, trainer);
        changed = true;
      }
      if (changed) {
        if (trainer.records_wall_clock()) record.finished_at = detail::utc_timestamp();
        std::lock_guard<std::mutex> guard(pool_mutex_);
        pool_.update(record);
        if (!dir_.empty()) append_pool_line(pool_path(), record);
      }
    });
    return selection;
  }

  TrialRecord execute_trial(TrainerBinding& trainer, int id, const ParamVector& params,
                            TrialOrigin origin, std::optional<double> kappa,
                            std::optional<int> snapshot_size) {
    TrialRecord record;
    record.config.trial_id = id;
    record.config.params = params;
    record.config.seed = detail::trial_seed(config_.master_seed, id);
    record.config.n_samples = config_.n_samples;
    record.config.n_epochs = config_.n_epochs;
    record.config.t1 = config_.t1;
    record.config.t2 = config_.t2;
    record.origin = origin;
    record.kappa_used = kappa;
    record.pool_size_at_proposal = snapshot_size;
    if (trainer.records_wall_clock()) record.started_at = detail::utc_timestamp();
    record.early = run_early(trainer, record.config, checkpoint_dir(id));
    if (trainer.records_wall_clock()) record.finished_at = detail::utc_timestamp();
    return record;
  }

  [[nodiscard]] std::string checkpoint_dir(int id) const {
    if (dir_.empty()) return {};
    return (dir_ / "trials" / std::to_string(id)).string();
  }

  void commit_new(TrialRecord record) {
    std::lock_guard<std::mutex> guard(pool_mutex_);
    pool_.append(record);
    if (!dir_.empty()) append_pool_line(pool_path(), record);
  }

  template <typename Work>
  void parallel_for(const std::vector<int>& ids, const Work& work) {
    if (ids.empty()) return;
    if (config_.workers == 1 || ids.size() == 1) {
      for (int id : ids) work(id);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
      while (!failed.load()) {
        const std::size_t index = next.fetch_add(1);
        if (index >= ids.size()) break;
        try {
          work(ids[index]);
        } catch (...) {
          std::lock_guard<std::mutex> guard(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(config_.workers), ids.size());
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(body);
    for (auto& thread : threads) thread.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  StudyReport make_report(const TopKSelection& selection) {
    StudyReport report;
    report.records = pool_.snapshot();
    report.top_k_ids = selection.ids;
    report.selection_warning = selection.warning;
    for (int id : selection.ids) {
      const TrialRecord& record = pool_.at(id);
      if (!record.late.has_value()) continue;
      const double accuracy = record.late->accuracy;
      if (report.best_trial_id < 0 || accuracy > report.best_accuracy ||
          (accuracy == report.best_accuracy && id < report.best_trial_id)) {
        report.best_trial_id = id;
        report.best_params = record.config.params;
        report.best_accuracy = accuracy;
      }
    }
    return report;
  }

  StudyConfig config_;
  std::filesystem::path dir_;
  ResultPool pool_;
  std::mutex pool_mutex_;
};

/// Convenience wrapper: configure, run, report.
inline StudyReport run_study(const StudyConfig& config,
                             const std::filesystem::path& directory = {}) {
  Study study(config, directory);
  return study.run();
}

}  // namespace earlybo
