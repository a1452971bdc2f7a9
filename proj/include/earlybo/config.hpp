// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Declarative study/sweep documents: strict JSON parsing (unknown keys are
// rejected with their path), documented defaults for every omitted key,
// and an echo serializer so the effective configuration lands next to the
// results it produced.

#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "earlybo/detail/hash.hpp"
#include "earlybo/error.hpp"
#include "earlybo/study.hpp"
#include "earlybo/sweep.hpp"

namespace earlybo {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& object,
                                const std::set<std::string>& allowed,
                                const std::string& path) {
  for (const auto& [key, value] : object.items()) {
    if (allowed.count(key) == 0) {
      throw ValidationError("unknown key '" + (path.empty() ? key : path + "." + key) +
                            "' in config document");
    }
  }
}

template <typename T>
T get_or(const nlohmann::json& object, const std::string& key, T fallback,
         const std::string& path) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("key '" + (path.empty() ? key : path + "." + key) +
                          "' has the wrong type");
  }
}

}  // namespace detail

inline nlohmann::json load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ValidationError("config file " + path.string() + " is not a JSON object");
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Search-space section
// ---------------------------------------------------------------------------

/// Space entries may narrow a dimension's published range but not widen it;
/// the dimension kind is fixed.
inline SearchSpace parse_space_section(const nlohmann::json& section) {
  if (!section.is_array()) {
    throw ValidationError("'space' must be an array of dimension objects");
  }
  std::vector<Dimension> dimensions = default_space().dimensions();
  std::set<std::string> seen;
  for (const auto& entry : section) {
    if (!entry.is_object()) throw ValidationError("space entries must be objects");
    detail::reject_unknown_keys(entry, {"name", "kind", "low", "high"}, "space");
    if (!entry.contains("name")) throw ValidationError("space entry without 'name'");
    const std::string name = entry.at("name").get<std::string>();
    if (!seen.insert(name).second) {
      throw ValidationError("space lists dimension '" + name + "' twice");
    }
    auto it = std::find_if(dimensions.begin(), dimensions.end(),
                           [&](const Dimension& d) { return d.name == name; });
    if (it == dimensions.end()) {
      throw ValidationError("space.name '" + name + "' is not a tunable hyperparameter");
    }
    if (entry.contains("kind")) {
      const auto kind = dimension_kind_from_string(entry.at("kind").get<std::string>());
      if (kind != it->kind) {
        throw ValidationError("space." + name + ".kind cannot be changed from " +
                              to_string(it->kind));
      }
    }
    const Dimension canonical = *it;
    it->low = detail::get_or<double>(entry, "low", it->low, "space." + name);
    it->high = detail::get_or<double>(entry, "high", it->high, "space." + name);
    if (it->low < canonical.low) {
      throw ValidationError("space." + name + ".low=" + std::to_string(it->low) +
                            " is below the supported bound " + std::to_string(canonical.low));
    }
    if (it->high > canonical.high) {
      throw ValidationError("space." + name + ".high=" + std::to_string(it->high) +
                            " exceeds the supported bound " + std::to_string(canonical.high));
    }
    it->validate();
  }
  return SearchSpace(dimensions);
}

inline nlohmann::json space_to_json(const SearchSpace& space) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& dim : space.dimensions()) {
    out.push_back({{"name", dim.name},
                   {"kind", to_string(dim.kind)},
                   {"low", dim.low},
                   {"high", dim.high}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel / trainer sections
// ---------------------------------------------------------------------------

inline KernelConfig parse_kernel_section(const nlohmann::json& section) {
  if (!section.is_object()) throw ValidationError("'kernel' must be an object");
  detail::reject_unknown_keys(
      section, {"family", "length_scales", "signal_variance", "noise_variance", "jitter"},
      "kernel");
  KernelConfig kernel;
  if (section.contains("family")) {
    kernel.family = kernel_family_from_string(section.at("family").get<std::string>());
  }
  if (section.contains("length_scales")) {
    kernel.length_scales = section.at("length_scales").get<std::vector<double>>();
  }
  kernel.signal_variance =
      detail::get_or<double>(section, "signal_variance", kernel.signal_variance, "kernel");
  kernel.noise_variance =
      detail::get_or<double>(section, "noise_variance", kernel.noise_variance, "kernel");
  kernel.jitter = detail::get_or<double>(section, "jitter", kernel.jitter, "kernel");
  return kernel;
}

inline nlohmann::json kernel_to_json(const KernelConfig& kernel) {
  nlohmann::json out = {{"family", to_string(kernel.family)},
                        {"signal_variance", kernel.signal_variance},
                        {"noise_variance", kernel.noise_variance},
                        {"jitter", kernel.jitter}};
  if (!kernel.length_scales.empty()) out["length_scales"] = kernel.length_scales;
  return out;
}

inline TrainerSpec parse_trainer_section(const nlohmann::json& section) {
  if (!section.is_object()) throw ValidationError("'trainer' must be an object");
  detail::reject_unknown_keys(section, {"type", "command", "noise"}, "trainer");
  TrainerSpec spec;
  const std::string type =
      detail::get_or<std::string>(section, "type", "builtin-synthetic", "trainer");
  if (type == "builtin-synthetic") {
    spec.type = TrainerSpec::Type::builtin_synthetic;
    if (section.contains("command")) {
      throw ValidationError("trainer.command is only valid for type 'external'");
    }
    spec.noise = detail::get_or<bool>(section, "noise", false, "trainer");
  } else if (type == "external") {
    spec.type = TrainerSpec::Type::external;
    if (section.contains("noise")) {
      throw ValidationError("trainer.noise is only valid for type 'builtin-synthetic'");
    }
    if (!section.contains("command")) {
      throw ValidationError("trainer.command is required for type 'external'");
    }
    spec.command = section.at("command").get<std::string>();
  } else {
    throw ValidationError("trainer.type must be 'builtin-synthetic' or 'external'");
  }
  return spec;
}

inline nlohmann::json trainer_to_json(const TrainerSpec& spec) {
  if (spec.type == TrainerSpec::Type::builtin_synthetic) {
    return {{"type", "builtin-synthetic"}, {"noise", spec.noise}};
  }
  return {{"type", "external"}, {"command", spec.command}};
}

// ---------------------------------------------------------------------------
// Study document
// ---------------------------------------------------------------------------

struct StudyDocument {
  StudyConfig config;
  std::string output_dir;
};

inline StudyDocument parse_study_document(const nlohmann::json& doc) {
  detail::reject_unknown_keys(
      doc,
      {"iterations", "initial_random", "top_k", "t1", "t2", "kappa_explore",
       "kappa_exploit", "n_samples", "n_epochs", "workers", "seed", "candidates",
       "dedup", "refit_kernel", "space", "kernel", "trainer", "output_dir"},
      "");
  StudyDocument document;
  StudyConfig& config = document.config;
  config.iterations = detail::get_or<int>(doc, "iterations", config.iterations, "");
  config.n_initial_random =
      detail::get_or<int>(doc, "initial_random", config.n_initial_random, "");
  config.top_k = detail::get_or<int>(doc, "top_k", config.top_k, "");
  config.t1 = detail::get_or<double>(doc, "t1", config.t1, "");
  config.t2 = detail::get_or<double>(doc, "t2", config.t2, "");
  config.kappa_explore = detail::get_or<double>(doc, "kappa_explore", config.kappa_explore, "");
  config.kappa_exploit = detail::get_or<double>(doc, "kappa_exploit", config.kappa_exploit, "");
  config.n_samples = detail::get_or<std::int64_t>(doc, "n_samples", config.n_samples, "");
  config.n_epochs = detail::get_or<int>(doc, "n_epochs", config.n_epochs, "");
  config.workers = detail::get_or<int>(doc, "workers", config.workers, "");
  config.master_seed = detail::get_or<std::uint64_t>(doc, "seed", config.master_seed, "");
  config.proposal.n_candidates =
      detail::get_or<int>(doc, "candidates", config.proposal.n_candidates, "");
  config.dedup_proposals = detail::get_or<bool>(doc, "dedup", config.dedup_proposals, "");
  config.refit_kernel = detail::get_or<bool>(doc, "refit_kernel", config.refit_kernel, "");
  if (doc.contains("space")) config.space = parse_space_section(doc.at("space"));
  if (doc.contains("kernel")) config.kernel = parse_kernel_section(doc.at("kernel"));
  if (doc.contains("trainer")) config.trainer = parse_trainer_section(doc.at("trainer"));
  document.output_dir = detail::get_or<std::string>(doc, "output_dir", "", "");
  config.validate();
  return document;
}

/// Full echo of the effective configuration, defaults materialized, plus
/// the target-layer chain mapping and a digest for provenance.
inline nlohmann::json study_document_to_json(const StudyDocument& document) {
  const StudyConfig& config = document.config;
  nlohmann::json doc = {
      {"iterations", config.iterations},
      {"initial_random", config.n_initial_random},
      {"top_k", config.top_k},
      {"t1", config.t1},
      {"t2", config.t2},
      {"kappa_explore", config.kappa_explore},
      {"kappa_exploit", config.kappa_exploit},
      {"n_samples", config.n_samples},
      {"n_epochs", config.n_epochs},
      {"workers", config.workers},
      {"seed", config.master_seed},
      {"candidates", config.proposal.n_candidates},
      {"dedup", config.dedup_proposals},
      {"refit_kernel", config.refit_kernel},
      {"space", space_to_json(config.space)},
      {"kernel", kernel_to_json(config.kernel)},
      {"trainer", trainer_to_json(config.trainer)},
  };
  if (!document.output_dir.empty()) doc["output_dir"] = document.output_dir;
  nlohmann::json chains;
  for (int i = 0; i <= 3; ++i) {
    chains[std::to_string(i)] = lora_targets_for_index(i);
  }
  doc["metadata"] = {{"target_chains", chains}};
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(detail::stable_hash(doc.dump())));
  doc["metadata"]["config_digest"] = digest;
  return doc;
}

/// Reads back an echoed study document (resume path). The metadata block
/// written by the echo is tolerated and ignored.
inline StudyDocument parse_study_document_echo(nlohmann::json doc) {
  doc.erase("metadata");
  return parse_study_document(doc);
}

// ---------------------------------------------------------------------------
// Sweep document
// ---------------------------------------------------------------------------

struct SweepDocument {
  SweepConfig config;
  std::string output_dir;
};

inline SweepDocument parse_sweep_document(const nlohmann::json& doc) {
  detail::reject_unknown_keys(
      doc,
      {"sizes", "n_epochs", "learning_rate", "batch_size", "lora_target_index",
       "lora_rank", "lora_alpha", "lora_dropout", "seed", "workers", "epsilon",
       "trainer", "output_dir"},
      "");
  SweepDocument document;
  SweepConfig& config = document.config;
  if (doc.contains("sizes")) {
    config.sizes = doc.at("sizes").get<std::vector<std::int64_t>>();
  }
  config.n_epochs = detail::get_or<int>(doc, "n_epochs", config.n_epochs, "");
  ParamVector& p = config.fixed_params;
  p.learning_rate = detail::get_or<double>(doc, "learning_rate", p.learning_rate, "");
  p.batch_size = detail::get_or<int>(doc, "batch_size", p.batch_size, "");
  p.lora_target_index =
      detail::get_or<int>(doc, "lora_target_index", p.lora_target_index, "");
  p.lora_rank = detail::get_or<int>(doc, "lora_rank", p.lora_rank, "");
  p.lora_alpha = detail::get_or<double>(doc, "lora_alpha", p.lora_alpha, "");
  p.lora_dropout = detail::get_or<double>(doc, "lora_dropout", p.lora_dropout, "");
  config.seed = detail::get_or<std::uint64_t>(doc, "seed", config.seed, "");
  config.workers = detail::get_or<int>(doc, "workers", config.workers, "");
  config.epsilon = detail::get_or<double>(doc, "epsilon", config.epsilon, "");
  if (doc.contains("trainer")) config.trainer = parse_trainer_section(doc.at("trainer"));
  document.output_dir = detail::get_or<std::string>(doc, "output_dir", "", "");
  config.validate();
  default_space().validate(config.fixed_params);
  return document;
}

inline nlohmann::json sweep_document_to_json(const SweepDocument& document) {
  const SweepConfig& config = document.config;
  nlohmann::json doc = {
      {"sizes", config.sizes},
      {"n_epochs", config.n_epochs},
      {"learning_rate", config.fixed_params.learning_rate},
      {"batch_size", config.fixed_params.batch_size},
      {"lora_target_index", config.fixed_params.lora_target_index},
      {"lora_rank", config.fixed_params.lora_rank},
      {"lora_alpha", config.fixed_params.lora_alpha},
      {"lora_dropout", config.fixed_params.lora_dropout},
      {"seed", config.seed},
      {"workers", config.workers},
      {"epsilon", config.epsilon},
      {"trainer", trainer_to_json(config.trainer)},
  };
  if (!document.output_dir.empty()) doc["output_dir"] = document.output_dir;
  return doc;
}

}  // namespace earlybo
