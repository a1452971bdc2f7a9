// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Trainer bindings. A trainer takes one phase request (train to t1, resume
// to t2, or evaluate a checkpoint) and reports loss samples plus exactly
// one accuracy value. Two implementations: the in-process synthetic
// trainer, and a client for external trainer processes speaking the
// line-delimited JSON protocol described in the README.

#pragma once

#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "earlybo/error.hpp"
#include "earlybo/synthetic.hpp"
#include "earlybo/trial.hpp"

namespace earlybo {

enum class TrainerMode { hpo, sweep };

struct PhaseRequest {
  TrialConfig config;
  Phase phase = Phase::early;
  TrainerMode mode = TrainerMode::hpo;
  double eval_at = 0.0;  // only meaningful for Phase::eval
  std::string checkpoint_dir;
};

struct TrainerResult {
  PhaseStatus status = PhaseStatus::ok;
  double accuracy = 0.0;
  std::vector<LossSample> losses;
  std::map<std::string, double> per_attribute;
  std::string detail;  // diagnostic note for degenerate/crashed outcomes
};

class TrainerBinding {
 public:
  virtual ~TrainerBinding() = default;

  virtual TrainerResult run(const PhaseRequest& request) = 0;

  /// Token recorded as checkpoint_ref after a successful early phase.
  virtual std::string checkpoint_ref(const PhaseRequest& request) const = 0;

  /// Throws StudyError when the binding cannot possibly execute (e.g. the
  /// external command does not exist). Called once before a study starts.
  virtual void preflight() const {}

  /// Whether trial records should carry wall-clock stamps. The synthetic
  /// binding says no, keeping seeded reruns byte-identical.
  virtual bool records_wall_clock() const { return true; }
};

namespace detail {

/// Loss sample fractions for one phase: every 0.1 of epoch fraction inside
/// (start, end], plus the phase boundary when it is not itself a multiple.
inline std::vector<double> loss_cadence(double start, double end) {
  std::vector<double> fractions;
  const auto k_start = static_cast<int>(std::floor(start * 10.0 + 1e-9)) + 1;
  const auto k_end = static_cast<int>(std::floor(end * 10.0 + 1e-9));
  for (int k = k_start; k <= k_end; ++k) {
    fractions.push_back(static_cast<double>(k) / 10.0);
  }
  if (std::abs(end * 10.0 - std::round(end * 10.0)) > 1e-9) {
    fractions.push_back(end);
  }
  return fractions;
}

inline const std::array<const char*, 8>& attribute_names_for_synth() {
  static const std::array<const char*, 8> names = {
      "price", "description", "rating", "title",
      "email", "facebook", "phone", "twitter"};
  return names;
}

}  // namespace detail

/// Pure-function trainer: accuracy comes from the synthetic learning curve,
/// so resume is exact and reruns are deterministic. The noise field is
/// keyed by a binding-level seed shared across trials, not by the
/// per-trial seed: duplicate configurations measure identically.
class SyntheticTrainer final : public TrainerBinding {
 public:
  explicit SyntheticTrainer(bool noise, std::uint64_t noise_seed = 0)
      : noise_(noise), noise_seed_(noise_seed) {}

  TrainerResult run(const PhaseRequest& request) override {
    request.config.validate();
    if (request.mode == TrainerMode::sweep) return run_sweep(request);
    switch (request.phase) {
      case Phase::early: return run_segment(request, 0.0, request.config.t1);
      case Phase::late: return run_segment(request, request.config.t1, request.config.t2);
      case Phase::eval: {
        TrainerResult result;
        result.accuracy =
            synth::accuracy(request.config.params, request.eval_at, noise_seed_, noise_);
        result.status = synth::fails(request.config.params) ? PhaseStatus::degenerate
                                                            : PhaseStatus::ok;
        return result;
      }
    }
    throw Error("unhandled phase");
  }

  std::string checkpoint_ref(const PhaseRequest& request) const override {
    return "synth:" + std::to_string(request.config.trial_id);
  }

  bool records_wall_clock() const override { return false; }

  [[nodiscard]] bool noise() const { return noise_; }
  [[nodiscard]] std::uint64_t noise_seed() const { return noise_seed_; }

 private:
  TrainerResult run_segment(const PhaseRequest& request, double start, double end) const {
    const auto& config = request.config;
    TrainerResult result;
    for (double f : detail::loss_cadence(start, end)) {
      result.losses.push_back({f, synth::loss(config.params, f, noise_seed_, noise_)});
    }
    result.accuracy = synth::accuracy(config.params, end, noise_seed_, noise_);
    if (synth::fails(config.params)) {
      result.status = PhaseStatus::degenerate;
      result.accuracy = 0.0;
      result.detail = "synthetic divergence: high learning rate x high alpha";
    }
    return result;
  }

  TrainerResult run_sweep(const PhaseRequest& request) const {
    const auto& config = request.config;
    TrainerResult result;
    double sum = 0.0;
    int index = 0;
    for (const char* name : detail::attribute_names_for_synth()) {
      const double acc = synth::sweep_accuracy(config.n_samples, noise_seed_, noise_, index++);
      result.per_attribute[name] = acc;
      sum += acc;
    }
    result.accuracy = sum / static_cast<double>(result.per_attribute.size());
    return result;
  }

  bool noise_;
  std::uint64_t noise_seed_;
};

namespace detail {

inline std::string shell_quote(const std::string& s) {
  std::string quoted = "'";
  for (char c : s) {
    if (c == '\'') {
      quoted += "'\\''";
    } else {
      quoted += c;
    }
  }
  quoted += "'";
  return quoted;
}

inline std::string first_command_token(const std::string& command) {
  std::string token;
  bool in_single = false, in_double = false;
  for (char c : command) {
    if (c == '\'' && !in_double) { in_single = !in_single; continue; }
    if (c == '"' && !in_single) { in_double = !in_double; continue; }
    if ((c == ' ' || c == '\t') && !in_single && !in_double) {
      if (!token.empty()) break;
      continue;
    }
    token += c;
  }
  return token;
}

inline bool executable_exists(const std::string& token) {
  namespace fs = std::filesystem;
  if (token.empty()) return false;
  if (token.find('/') != std::string::npos) {
    return ::access(token.c_str(), X_OK) == 0;
  }
  const char* path_env = std::getenv("PATH");
  if (path_env == nullptr) return false;
  std::stringstream stream(path_env);
  std::string dir;
  while (std::getline(stream, dir, ':')) {
    if (dir.empty()) continue;
    fs::path candidate = fs::path(dir) / token;
    if (::access(candidate.c_str(), X_OK) == 0) return true;
  }
  return false;
}

}  // namespace detail

/// Client for external trainer processes:
///   <command> --config <file> --phase early|continue|eval --checkpoint-dir <dir>
/// stdout carries one JSON object per line; exit 0 = ok, 2 = self-detected
/// divergence (degenerate), anything else = crashed.
class ExternalTrainer final : public TrainerBinding {
 public:
  explicit ExternalTrainer(std::string command) : command_(std::move(command)) {}

  TrainerResult run(const PhaseRequest& request) override {
    namespace fs = std::filesystem;
    request.config.validate();
    if (request.checkpoint_dir.empty()) {
      throw StudyError("external trainer needs a checkpoint directory");
    }
    fs::create_directories(request.checkpoint_dir);
    const fs::path config_path = fs::path(request.checkpoint_dir) / "trial_config.json";
    write_config_file(config_path, request);

    std::string cmd = command_;
    cmd += " --config " + detail::shell_quote(config_path.string());
    cmd += " --phase ";
    cmd += request.phase == Phase::early ? "early"
           : request.phase == Phase::late ? "continue"
                                          : "eval";
    cmd += " --checkpoint-dir " + detail::shell_quote(request.checkpoint_dir);
    cmd += " 2>/dev/null";

    TrainerResult result;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
      result.status = PhaseStatus::crashed;
      result.detail = "failed to start trainer process";
      return result;
    }

    std::string output;
    std::array<char, 4096> buffer{};
    std::size_t n = 0;
    while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
      output.append(buffer.data(), n);
    }
    const int raw_status = ::pclose(pipe);
    const int exit_code = raw_status < 0 ? -1
                          : WIFEXITED(raw_status) ? WEXITSTATUS(raw_status)
                                                  : -1;

    std::string violation;
    parse_event_stream(output, result, violation);

    if (exit_code != 0 && exit_code != 2) {
      result.status = PhaseStatus::crashed;
      result.accuracy = 0.0;
      result.losses.clear();
      result.per_attribute.clear();
      result.detail = "trainer exited with code " + std::to_string(exit_code);
    } else if (!violation.empty()) {
      result.status = PhaseStatus::degenerate;
      result.accuracy = 0.0;
      result.losses.clear();
      result.per_attribute.clear();
      result.detail = "protocol violation: " + violation;
    } else if (exit_code == 2) {
      result.status = PhaseStatus::degenerate;
      result.accuracy = 0.0;
      result.detail = "trainer reported divergence (exit 2)";
    }
    return result;
  }

  std::string checkpoint_ref(const PhaseRequest& request) const override {
    return request.checkpoint_dir;
  }

  void preflight() const override {
    const std::string token = detail::first_command_token(command_);
    if (!detail::executable_exists(token)) {
      throw StudyError("trainer command unreachable: '" + token + "' is not executable");
    }
  }

  [[nodiscard]] const std::string& command() const { return command_; }

 private:
  static void write_config_file(const std::filesystem::path& path,
                                const PhaseRequest& request) {
    const auto& c = request.config;
    nlohmann::json doc = {
        {"trial_id", c.trial_id},
        {"lora_target_index", c.params.lora_target_index},
        {"learning_rate", c.params.learning_rate},
        {"batch_size", c.params.batch_size},
        {"lora_rank", c.params.lora_rank},
        {"lora_alpha", c.params.lora_alpha},
        {"lora_dropout", c.params.lora_dropout},
        {"seed", c.seed},
        {"n_samples", c.n_samples},
        {"n_epochs", c.n_epochs},
        {"t1", c.t1},
        {"t2", c.t2},
        {"lr_schedule", "cosine"},
        {"lr_warmup", 0.1},
    };
    if (request.phase == Phase::eval) {
      doc["eval_at"] = request.eval_at;
    }
    std::ofstream out(path);
    if (!out) throw StudyError("cannot write trainer config file " + path.string());
    out << doc.dump() << "\n";
  }

  // Fills result from the event stream; the first protocol problem found is
  // reported through `violation`.
  static void parse_event_stream(const std::string& output, TrainerResult& result,
                                 std::string& violation) {
    auto fail = [&](const std::string& why) {
      if (violation.empty()) violation = why;
    };
    int accuracy_events = 0;
    std::stringstream stream(output);
    std::string line;
    while (std::getline(stream, line)) {
      if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json event = nlohmann::json::parse(line, nullptr, false);
      if (event.is_discarded() || !event.is_object() || !event.contains("event")) {
        fail("unparseable event line");
        continue;
      }
      const std::string kind = event["event"].is_string() ? event["event"].get<std::string>() : "";
      if (kind == "loss") {
        if (!event.contains("epoch_fraction") || !event.contains("value") ||
            !event["epoch_fraction"].is_number() || !event["value"].is_number()) {
          fail("malformed loss event");
          continue;
        }
        const double f = event["epoch_fraction"].get<double>();
        const double v = event["value"].get<double>();
        if (!std::isfinite(f) || !std::isfinite(v)) {
          fail("non-finite loss event");
          continue;
        }
        result.losses.push_back({f, v});
      } else if (kind == "accuracy") {
        ++accuracy_events;
        if (accuracy_events > 1) {
          fail("more than one accuracy event");
          continue;
        }
        if (!event.contains("value") || !event["value"].is_number()) {
          fail("accuracy event without numeric value");
          continue;
        }
        const double v = event["value"].get<double>();
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
          fail("accuracy outside [0, 1]");
          continue;
        }
        result.accuracy = v;
        if (event.contains("per_attribute")) {
          if (!event["per_attribute"].is_object()) {
            fail("per_attribute is not an object");
            continue;
          }
          for (const auto& [name, value] : event["per_attribute"].items()) {
            if (!value.is_number() || !std::isfinite(value.get<double>())) {
              fail("non-numeric per-attribute accuracy");
              break;
            }
            result.per_attribute[name] = value.get<double>();
          }
        }
      }
      // Unknown event kinds are ignored for forward compatibility.
    }
    if (accuracy_events == 0) fail("missing accuracy event");
  }

  std::string command_;
};

struct TrainerSpec {
  enum class Type { builtin_synthetic, external };
  Type type = Type::builtin_synthetic;
  std::string command;            // external only
  bool noise = false;             // synthetic only
  std::uint64_t noise_seed = 0;   // synthetic only; studies use their master seed

  void validate() const {
    if (type == Type::external && command.empty()) {
      throw ValidationError("external trainer requires a command");
    }
  }
};

inline std::unique_ptr<TrainerBinding> make_trainer(const TrainerSpec& spec) {
  spec.validate();
  if (spec.type == TrainerSpec::Type::builtin_synthetic) {
    return std::make_unique<SyntheticTrainer>(spec.noise, spec.noise_seed);
  }
  return std::make_unique<ExternalTrainer>(spec.command);
}

}  // namespace earlybo
