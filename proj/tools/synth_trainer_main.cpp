// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Standalone synthetic trainer speaking the external-trainer protocol.
// Exists so the subprocess path can be exercised end to end without a GPU:
//
//   earlybo-synth-trainer --config <file> --phase early|continue|eval \
//       --checkpoint-dir <dir> [--noise] [--noise-seed N] [--sweep]
//
// stdout: {"event":"loss",...} lines plus exactly one accuracy event at
// the phase boundary. Exit 0 = ok, 2 = self-detected divergence,
// 3 = unusable invocation (missing config/checkpoint).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "earlybo/search_space.hpp"
#include "earlybo/synthetic.hpp"
#include "earlybo/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit_loss(double fraction, double value) {
  json event = {{"event", "loss"}, {"epoch_fraction", fraction}, {"value", value}};
  std::cout << event.dump() << "\n";
}

void emit_accuracy(double fraction, double value, const json* per_attribute = nullptr) {
  json event = {{"event", "accuracy"}, {"epoch_fraction", fraction}, {"value", value}};
  if (per_attribute != nullptr) event["per_attribute"] = *per_attribute;
  std::cout << event.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic trainer (external-protocol stand-in for LoRA fine-tuning)"};
  std::string config_path, phase, checkpoint_dir;
  bool noise = false, sweep = false;
  std::uint64_t noise_seed = 0;  // shared across trials: repeats measure identically
  app.add_option("--config", config_path)->required();
  app.add_option("--phase", phase)->required()->check(CLI::IsMember({"early", "continue", "eval"}));
  app.add_option("--checkpoint-dir", checkpoint_dir)->required();
  app.add_flag("--noise", noise);
  app.add_option("--noise-seed", noise_seed);
  app.add_flag("--sweep", sweep);
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot open config " << config_path << "\n";
    return 3;
  }
  json config = json::parse(in, nullptr, false);
  if (config.is_discarded()) {
    std::cerr << "config is not valid JSON\n";
    return 3;
  }

  earlybo::ParamVector params;
  std::int64_t n_samples = 0;
  double t1 = 0.2, t2 = 0.8, eval_at = 0.0;
  int trial_id = 0;
  try {
    trial_id = config.at("trial_id").get<int>();
    params.lora_target_index = config.at("lora_target_index").get<int>();
    params.learning_rate = config.at("learning_rate").get<double>();
    params.batch_size = config.at("batch_size").get<int>();
    params.lora_rank = config.at("lora_rank").get<int>();
    params.lora_alpha = config.at("lora_alpha").get<double>();
    params.lora_dropout = config.at("lora_dropout").get<double>();
    n_samples = config.at("n_samples").get<std::int64_t>();
    t1 = config.at("t1").get<double>();
    t2 = config.at("t2").get<double>();
    if (config.contains("eval_at")) eval_at = config["eval_at"].get<double>();
  } catch (const json::exception& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return 3;
  }

  if (sweep) {
    json per_attribute;
    double sum = 0.0;
    int index = 0;
    for (const char* name : earlybo::detail::attribute_names_for_synth()) {
      const double acc = earlybo::synth::sweep_accuracy(n_samples, noise_seed, noise, index++);
      per_attribute[name] = acc;
      sum += acc;
    }
    emit_accuracy(t1, sum / 8.0, &per_attribute);
    return 0;
  }

  const fs::path checkpoint = fs::path(checkpoint_dir) / "checkpoint.json";
  const bool failed = earlybo::synth::fails(params);

  if (phase == "early") {
    for (double f : earlybo::detail::loss_cadence(0.0, t1)) {
      emit_loss(f, earlybo::synth::loss(params, f, noise_seed, noise));
    }
    emit_accuracy(t1, failed ? 0.0 : earlybo::synth::accuracy(params, t1, noise_seed, noise));
    fs::create_directories(checkpoint_dir);
    std::ofstream out(checkpoint);
    out << json{{"trial_id", trial_id}, {"trained_to", t1}}.dump() << "\n";
    return failed ? 2 : 0;
  }

  // continue / eval need the early checkpoint.
  std::ifstream ck(checkpoint);
  if (!ck) {
    std::cerr << "missing checkpoint " << checkpoint.string() << "\n";
    return 3;
  }
  json state = json::parse(ck, nullptr, false);
  if (state.is_discarded() || state.value("trial_id", -1) != trial_id) {
    std::cerr << "checkpoint does not belong to trial " << trial_id << "\n";
    return 3;
  }

  if (phase == "continue") {
    for (double f : earlybo::detail::loss_cadence(t1, t2)) {
      emit_loss(f, earlybo::synth::loss(params, f, noise_seed, noise));
    }
    emit_accuracy(t2, failed ? 0.0 : earlybo::synth::accuracy(params, t2, noise_seed, noise));
    std::ofstream out(checkpoint);
    out << json{{"trial_id", trial_id}, {"trained_to", t2}}.dump() << "\n";
    return failed ? 2 : 0;
  }

  // eval: score the checkpoint closest to the requested fraction; the
  // synthetic curve can be evaluated anywhere, so "closest" is exact.
  emit_accuracy(eval_at, failed ? 0.0 : earlybo::synth::accuracy(params, eval_at, noise_seed, noise));
  return failed ? 2 : 0;
}
