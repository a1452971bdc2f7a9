// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator CLI: define studies, run/resume them, run data-efficiency
// sweeps, evaluate record files, and emit reports.
//
// Exit codes: 0 ok, 64 configuration error, 65 runtime/lock error,
// 66 data error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "earlybo/config.hpp"
#include "earlybo/executor.hpp"
#include "earlybo/metrics.hpp"
#include "earlybo/pool.hpp"
#include "earlybo/report.hpp"
#include "earlybo/study.hpp"
#include "earlybo/sweep.hpp"
#include "earlybo/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 64;
constexpr int kExitRuntime = 65;
constexpr int kExitData = 66;

struct StudyRunArgs {
  std::string config_path;
  std::string out_dir;
  int workers = 0;  // 0 = not overridden
  std::optional<std::uint64_t> seed;
};

struct ReportArgs {
  std::string study_dir;
  int k = 0;  // 0 = use the study's top_k
  std::string independent_path;
  std::string export_dir;
  std::vector<int> curve_ids;
};

int env_default_workers() {
  const char* env = std::getenv("EARLYBO_WORKERS");
  if (env == nullptr) return 0;
  const int value = std::atoi(env);
  return value >= 1 ? value : 0;
}

earlybo::StudyDocument load_study_echo(const fs::path& dir) {
  const fs::path path = dir / "study.json";
  std::ifstream in(path);
  if (!in) throw earlybo::DataError("cannot open " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw earlybo::DataError(path.string() + " is not valid JSON");
  return earlybo::parse_study_document_echo(std::move(doc));
}

void write_study_echo(const fs::path& dir, const earlybo::StudyDocument& document) {
  fs::create_directories(dir);
  std::ofstream out(dir / "study.json");
  if (!out) throw earlybo::StudyError("cannot write " + (dir / "study.json").string());
  out << earlybo::study_document_to_json(document).dump(2) << "\n";
}

void print_study_summary(const earlybo::StudyReport& report, int k) {
  using namespace earlybo;
  if (!report.selection_warning.empty()) {
    std::cout << "warning: " << report.selection_warning << "\n";
  }
  const RankTable table = rank_table(report.records, k);
  std::cout << "Rank table (top-" << k << "):\n" << render_rank_table(table);
  const int overlap_k = std::min<int>(k, static_cast<int>(
                                             std::min(table.t1.size(), table.t2.size())));
  if (overlap_k > 0) {
    std::cout << "Top-" << overlap_k << " overlap (t1 vs t2): "
              << top_k_overlap(table.t1, table.t2, overlap_k) << "\n";
  }
  std::vector<double> t1_acc, t2_acc;
  for (const auto& record : report.records) {
    if (record.late.has_value()) {
      t1_acc.push_back(record.early.accuracy);
      t2_acc.push_back(record.late->accuracy);
    }
  }
  if (t1_acc.size() >= 2) {
    const auto rho = spearman_rho(t1_acc, t2_acc);
    std::cout << "Spearman rho (t1 vs t2, continued trials): "
              << (rho ? std::to_string(*rho) : "undefined") << "\n";
  }
  if (report.best_trial_id >= 0) {
    const auto& p = report.best_params;
    char line[256];
    std::snprintf(line, sizeof(line),
                  "Best configuration: trial %d, late accuracy %.4f\n"
                  "  lora_target_index=%d learning_rate=%g batch_size=%d "
                  "lora_rank=%d lora_alpha=%g lora_dropout=%g\n",
                  report.best_trial_id, report.best_accuracy, p.lora_target_index,
                  p.learning_rate, p.batch_size, p.lora_rank, p.lora_alpha, p.lora_dropout);
    std::cout << line;
  }
}

int cmd_study_run(const StudyRunArgs& args) {
  nlohmann::json doc = earlybo::load_config_json(args.config_path);
  // Flags override document keys; the echoed document shows what ran.
  if (!args.out_dir.empty()) doc["output_dir"] = args.out_dir;
  if (args.workers > 0) {
    doc["workers"] = args.workers;
  } else if (!doc.contains("workers")) {
    const int env_workers = env_default_workers();
    if (env_workers > 0) doc["workers"] = env_workers;
  }
  if (args.seed) doc["seed"] = *args.seed;

  earlybo::StudyDocument document = earlybo::parse_study_document(doc);
  if (document.output_dir.empty()) {
    throw earlybo::ValidationError("no output directory: set 'output_dir' or pass --out");
  }
  const fs::path dir(document.output_dir);
  write_study_echo(dir, document);
  earlybo::Study study(document.config, dir);
  const earlybo::StudyReport report = study.run();
  print_study_summary(report, document.config.top_k);
  std::cout << "Pool: " << study.pool_path().string() << " (" << report.records.size()
            << " trials)\n";
  return kExitOk;
}

int cmd_study_resume(const std::string& dir_arg) {
  const fs::path dir(dir_arg);
  earlybo::StudyDocument document = load_study_echo(dir);
  if (!fs::exists(dir / "pool.jsonl")) {
    throw earlybo::DataError("no pool file in " + dir.string());
  }
  earlybo::Study study(document.config, dir);
  const earlybo::StudyReport report = study.resume();
  if (report.already_complete) {
    std::cout << "Study already complete; nothing to do.\n";
  }
  print_study_summary(report, document.config.top_k);
  return kExitOk;
}

int cmd_study_report(const ReportArgs& args) {
  using namespace earlybo;
  const fs::path dir(args.study_dir);
  const StudyDocument document = load_study_echo(dir);
  const ResultPool pool = load_pool(dir / "pool.jsonl");
  const std::vector<TrialRecord> records = pool.snapshot();
  const int k = args.k > 0 ? args.k : document.config.top_k;

  const RankTable table = rank_table(records, k);
  std::cout << "Rank table (top-" << k << "):\n" << render_rank_table(table);
  const int overlap_k =
      std::min<int>(k, static_cast<int>(std::min(table.t1.size(), table.t2.size())));
  if (overlap_k > 0) {
    std::cout << "Top-" << overlap_k << " overlap (t1 vs t2): "
              << top_k_overlap(table.t1, table.t2, overlap_k) << "\n";
  }
  std::vector<double> t1_acc, t2_acc;
  for (const auto& record : records) {
    if (record.late.has_value()) {
      t1_acc.push_back(record.early.accuracy);
      t2_acc.push_back(record.late->accuracy);
    }
  }
  if (t1_acc.size() >= 2) {
    const auto rho = spearman_rho(t1_acc, t2_acc);
    std::cout << "Spearman rho (t1 vs t2, continued trials): "
              << (rho ? std::to_string(*rho) : "undefined") << "\n";
  }
  std::cout << "Hyperparameters of the top-" << k << " trials at t1:\n"
            << param_table_tsv(param_table(records, k));

  if (!args.independent_path.empty()) {
    const IndependentScores scores = load_independent_scores(args.independent_path);
    std::cout << "Independent test re-evaluation:\n";
    std::cout << "phase\ttrial_id\tvalidation\tindependent\n";
    auto dump_phase = [&](const char* phase, const std::vector<RankEntry>& column) {
      for (const auto& entry : column) {
        const auto it = scores.find({phase, entry.trial_id});
        std::cout << phase << "\t" << entry.trial_id << "\t"
                  << detail::fmt_accuracy(entry.accuracy) << "\t"
                  << (it == scores.end() ? "-" : detail::fmt_accuracy(it->second)) << "\n";
      }
    };
    dump_phase("t1", table.t1);
    dump_phase("t2", table.t2);
    dump_phase("minima", table.minima);
  }

  if (!args.export_dir.empty()) {
    const fs::path out(args.export_dir);
    fs::create_directories(out);
    auto write = [&](const char* name, const std::string& content) {
      std::ofstream file(out / name);
      if (!file) throw StudyError("cannot write " + (out / name).string());
      file << content;
    };
    write("rank_table.tsv", rank_table_tsv(table));
    write("param_table.tsv", param_table_tsv(param_table(records, k)));
    write("failure_scatter.tsv", scatter_tsv(failure_scatter(records)));
    std::vector<int> curve_ids = args.curve_ids;
    if (curve_ids.empty()) {
      for (const auto& record : records) {
        if (record.late.has_value()) curve_ids.push_back(record.config.trial_id);
      }
    }
    const LossCurves curves = loss_curves(records, curve_ids);
    for (int id : curves.excluded_crashed) {
      std::cout << "notice: trial " << id << " crashed; excluded from loss curves\n";
    }
    write("loss_curves.tsv", loss_curves_tsv(curves));
    std::cout << "Exports written to " << out.string() << "\n";
  }
  return kExitOk;
}

int cmd_sweep_run(const std::string& config_path, const std::string& out_override) {
  nlohmann::json doc = earlybo::load_config_json(config_path);
  if (!out_override.empty()) doc["output_dir"] = out_override;
  earlybo::SweepDocument document = earlybo::parse_sweep_document(doc);
  const fs::path dir(document.output_dir);
  if (!document.output_dir.empty()) fs::create_directories(dir);
  const earlybo::SweepReport report = earlybo::run_sweep(document.config, dir);
  const std::string table = earlybo::sweep_table_tsv(report);
  std::cout << table;
  if (report.saturation) {
    char line[128];
    std::snprintf(line, sizeof(line),
                  "Saturation point (epsilon=%g): %lld samples at accuracy %.3f\n",
                  report.saturation->epsilon,
                  static_cast<long long>(report.saturation->size),
                  report.saturation->accuracy);
    std::cout << line;
  }
  if (!document.output_dir.empty()) {
    std::ofstream out(dir / "sweep.tsv");
    if (!out) throw earlybo::StudyError("cannot write " + (dir / "sweep.tsv").string());
    out << table;
    std::ofstream echo(dir / "sweep.json");
    echo << earlybo::sweep_document_to_json(document).dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& records_path, const std::string& attribute_filter,
             bool numeric, bool as_json, const std::string& compare_path) {
  using namespace earlybo;
  MatchOptions options;
  options.numeric_equivalence = numeric;
  std::vector<AttributeRecord> records = load_records(records_path);
  if (!attribute_filter.empty()) {
    const Attribute wanted = attribute_from_string(attribute_filter);
    std::erase_if(records, [&](const AttributeRecord& r) { return r.attribute != wanted; });
  }
  const EvalReport report = evaluate_records(records, options, records_path);

  if (!compare_path.empty()) {
    const EvalReport other =
        evaluate_records(load_records(compare_path), options, compare_path);
    const Comparison comparison =
        compare_reports(records_path, report, compare_path, other);
    char line[512];
    std::snprintf(line, sizeof(line),
                  "%s\t%.4f\n%s\t%.4f\ndelta (b - a)\t%+.4f\n",
                  comparison.label_a.c_str(), comparison.average_a,
                  comparison.label_b.c_str(), comparison.average_b, comparison.delta);
    std::cout << line;
    return kExitOk;
  }

  if (as_json) {
    nlohmann::json out;
    for (const auto& [attribute, acc] : report.per_attribute) {
      nlohmann::json entry = {{"n_nonempty_truth", acc.n_nonempty_truth}};
      if (acc.accuracy) {
        entry["accuracy"] = *acc.accuracy;
      } else {
        entry["accuracy"] = nullptr;
      }
      out["per_attribute"][to_string(attribute)] = entry;
    }
    if (report.average) {
      out["average"] = *report.average;
    } else {
      out["average"] = nullptr;
    }
    out["source"] = report.source;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << render_eval_report(report);
  }
  return kExitOk;
}

int cmd_space_validate(const std::string& config_path) {
  nlohmann::json doc = earlybo::load_config_json(config_path);
  earlybo::SearchSpace space = doc.contains("space")
                                   ? earlybo::parse_space_section(doc.at("space"))
                                   : earlybo::default_space();
  std::cout << "space ok: " << space.size() << " dimensions\n";
  for (const auto& dim : space.dimensions()) {
    char line[128];
    std::snprintf(line, sizeof(line), "  %-18s %-9s [%g, %g]\n", dim.name.c_str(),
                  earlybo::to_string(dim.kind), dim.low, dim.high);
    std::cout << line;
  }
  return kExitOk;
}

struct SynthEvalArgs {
  earlybo::ParamVector params;
  double t = 0.8;
  std::uint64_t seed = 0;
  bool noise = false;
  std::optional<std::int64_t> sweep_size;
};

int cmd_synth_eval(const SynthEvalArgs& args) {
  if (args.sweep_size) {
    std::cout << earlybo::synth::sweep_accuracy(*args.sweep_size, args.seed, args.noise)
              << "\n";
    return kExitOk;
  }
  earlybo::default_space().validate(args.params);
  std::cout << earlybo::synth::accuracy(args.params, args.t, args.seed, args.noise) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"earlybo: early-evaluation Bayesian hyperparameter optimization"};
  app.require_subcommand(1);

  // study run | study resume | study report
  auto* study = app.add_subcommand("study", "Run, resume or report an optimization study");
  study->require_subcommand(1);
  StudyRunArgs run_args;
  auto* study_run = study->add_subcommand("run", "Run a study from a config document");
  study_run->add_option("--config", run_args.config_path, "Study config document (JSON)")
      ->required();
  study_run->add_option("--out", run_args.out_dir, "Output directory (overrides output_dir)");
  study_run->add_option("--workers", run_args.workers, "Worker count override");
  std::uint64_t seed_flag = 0;
  auto* seed_opt = study_run->add_option("--seed", seed_flag, "Master seed override");

  std::string resume_dir;
  auto* study_resume = study->add_subcommand("resume", "Resume an interrupted study");
  study_resume->add_option("dir", resume_dir, "Study directory")->required();

  ReportArgs report_args;
  auto* study_report = study->add_subcommand("report", "Report on a completed study");
  study_report->add_option("dir", report_args.study_dir, "Study directory")->required();
  study_report->add_option("--k", report_args.k, "Rank-table depth (default: study top_k)");
  study_report->add_option("--independent", report_args.independent_path,
                           "Independent re-evaluation scores (JSONL)");
  study_report->add_option("--export", report_args.export_dir,
                           "Directory for TSV exports");
  study_report->add_option("--trials", report_args.curve_ids,
                           "Trial ids for loss-curve export");

  // sweep run
  auto* sweep = app.add_subcommand("sweep", "Data-efficiency sweep");
  sweep->require_subcommand(1);
  std::string sweep_config, sweep_out;
  auto* sweep_run = sweep->add_subcommand("run", "Run a sweep from a config document");
  sweep_run->add_option("--config", sweep_config, "Sweep config document (JSON)")->required();
  sweep_run->add_option("--out", sweep_out, "Output directory (overrides output_dir)");

  // eval
  std::string eval_records, eval_attribute, eval_compare;
  bool eval_numeric = false, eval_json = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a prediction record file");
  eval->add_option("--records", eval_records, "Record file (JSONL)")->required();
  eval->add_option("--attribute", eval_attribute, "Restrict to one attribute");
  eval->add_flag("--numeric", eval_numeric, "Numeric equivalence for price/rating");
  eval->add_flag("--json", eval_json, "Machine-readable output");
  eval->add_option("--compare", eval_compare, "Second record file; print accuracy delta");

  // space validate
  auto* space = app.add_subcommand("space", "Search-space utilities");
  space->require_subcommand(1);
  std::string space_config;
  auto* space_validate = space->add_subcommand("validate", "Validate a space definition");
  space_validate->add_option("--config", space_config, "Config document with a space section")
      ->required();

  // synth eval
  auto* synth = app.add_subcommand("synth", "Synthetic trainer utilities");
  synth->require_subcommand(1);
  SynthEvalArgs synth_args;
  std::int64_t sweep_size_flag = -1;
  auto* synth_eval = synth->add_subcommand("eval", "Evaluate the synthetic curve");
  synth_eval->add_option("--lora-target-index", synth_args.params.lora_target_index);
  synth_eval->add_option("--learning-rate", synth_args.params.learning_rate);
  synth_eval->add_option("--batch-size", synth_args.params.batch_size);
  synth_eval->add_option("--lora-rank", synth_args.params.lora_rank);
  synth_eval->add_option("--lora-alpha", synth_args.params.lora_alpha);
  synth_eval->add_option("--lora-dropout", synth_args.params.lora_dropout);
  synth_eval->add_option("--t", synth_args.t, "Epoch fraction in (0, 1]");
  synth_eval->add_option("--seed", synth_args.seed);
  synth_eval->add_flag("--noise", synth_args.noise, "Apply evaluation noise");
  auto* sweep_size_opt = synth_eval->add_option(
      "--sweep-size", sweep_size_flag, "Evaluate the sweep curve at this sample count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (seed_opt->count() > 0) run_args.seed = seed_flag;
    if (sweep_size_opt->count() > 0) synth_args.sweep_size = sweep_size_flag;
    if (study_run->parsed()) return cmd_study_run(run_args);
    if (study_resume->parsed()) return cmd_study_resume(resume_dir);
    if (study_report->parsed()) return cmd_study_report(report_args);
    if (sweep_run->parsed()) return cmd_sweep_run(sweep_config, sweep_out);
    if (eval->parsed()) {
      return cmd_eval(eval_records, eval_attribute, eval_numeric, eval_json, eval_compare);
    }
    if (space_validate->parsed()) return cmd_space_validate(space_config);
    if (synth_eval->parsed()) return cmd_synth_eval(synth_args);
    std::cerr << "no subcommand\n";
    return kExitConfig;
  } catch (const earlybo::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const earlybo::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const earlybo::StudyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
