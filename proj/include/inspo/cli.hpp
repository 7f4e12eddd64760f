// Copyright 2026 The InSPO Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "inspo/experiment.hpp"

namespace inspo::cli {

enum ExitCode : int { kOk = 0, kCheckFailure = 1, kUsage = 2, kRuntime = 3 };

// Thrown for problems with the invocation or its config; maps to kUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
  int jobs = 0;  // 0: take sweep.jobs from the config
};

namespace detail {

inline experiment::ExperimentConfig load_config(const CommonFlags& f, bool required) {
  experiment::ExperimentConfig c;
  if (f.config.empty()) {
    if (required) throw UsageError("--config is required");
  } else {
    try {
      c = experiment::config_from_json(io::read_json_file(f.config));
    } catch (const Error& e) {
      throw UsageError(f.config + ": " + e.what());
    }
  }
  if (f.seed) c.override_seed(*f.seed);
  return c;
}

// --out, then INSPO_LAB_OUT, then the config's output_dir.
inline std::filesystem::path output_dir(const CommonFlags& f, const experiment::ExperimentConfig& c) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv("INSPO_LAB_OUT"); env && *env) return env;
  return c.output_dir;
}

inline void write_run_info(const std::filesystem::path& dir, const std::string& command, double seconds) {
  io::Json j = io::header("run_info");
  j["command"] = command;
  j["wall_clock_seconds"] = seconds;
  io::write_json_file((dir / "run_info.json").string(), j);
}

class Log {
 public:
  Log(std::ostream& os, bool quiet) : os_(os), quiet_(quiet) {}
  template <class T>
  Log& operator<<(const T& v) {
    if (!quiet_) os_ << v;
    return *this;
  }

 private:
  std::ostream& os_;
  bool quiet_;
};

inline int cmd_gen_model(const CommonFlags& f, Log& log) {
  const auto c = load_config(f, false);
  const auto w = experiment::build_world(c);
  const auto dir = output_dir(f, c);
  std::filesystem::create_directories(dir);
  io::write_json_file((dir / "model.json").string(), io::to_json(w.model));
  io::write_json_file((dir / "reference.json").string(), io::to_json(w.ref));
  io::write_json_file((dir / "spaces.json").string(), io::spaces_document(w.spaces));
  log << "wrote " << (dir / "model.json").string() << "\n";
  return kOk;
}

inline int cmd_gen_data(const CommonFlags& f, Log& log) {
  const auto c = load_config(f, true);
  const auto w = experiment::build_world(c);
  const auto data = sample_dataset(w.spaces, w.model, w.ref, c.dataset_size, c.dataset_seed);
  const auto dir = output_dir(f, c);
  std::filesystem::create_directories(dir);
  io::write_json_file((dir / "dataset.json").string(), io::to_json(data));
  log << "wrote " << data.size() << " pairs to " << (dir / "dataset.json").string() << "\n";
  return kOk;
}

inline int cmd_train(const CommonFlags& f, Log& log) {
  const auto c = load_config(f, true);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = experiment::run_training(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto dir = output_dir(f, c);
  experiment::write_training_outputs(dir, r);
  write_run_info(dir, "train", secs);
  log << "heldout accuracy " << r.heldout.accuracy << ", value " << r.value_trained;
  if (r.baseline) log << " (baseline " << r.value_baseline << ")";
  log << "\n";
  const bool ok = r.report["checks"][0]["pass"].get<bool>();
  return ok ? kOk : kCheckFailure;
}

inline int cmd_verify(const CommonFlags& f, Log& log, std::ostream& err) {
  const auto c = load_config(f, false);
  const auto checks = verify::run_all(c.verification);
  const auto report = experiment::verify_report(c.verification, checks);
  const auto dir = output_dir(f, c);
  std::filesystem::create_directories(dir);
  io::write_json_file((dir / "verify_report.json").string(), report);
  for (const auto& ch : checks)
    log << (ch.pass ? "[PASS] " : "[FAIL] ") << ch.check_name << "  max_violation=" << ch.max_violation
        << " tol=" << ch.tolerance << "\n";
  for (const auto& ch : checks)
    if (!ch.pass) err << "failed check: " << ch.check_name << "\n";
  return report["all_pass"].get<bool>() ? kOk : kCheckFailure;
}

inline int cmd_evaluate(const CommonFlags& f, const std::vector<std::string>& files, Log& log) {
  const auto c = load_config(f, true);
  if (files.empty()) throw UsageError("evaluate needs at least one --policy file");
  const auto w = experiment::build_world(c);
  std::vector<experiment::LoadedPolicy> policies;
  for (const auto& file : files)
    policies.push_back(experiment::load_policy(std::filesystem::path(file).stem().string(),
                                               io::read_json_file(file), w.ref));
  const auto e = experiment::evaluate_policies(c, policies);
  const auto dir = output_dir(f, c);
  std::filesystem::create_directories(dir);
  io::write_json_file((dir / "evaluation.json").string(), e.report);
  io::write_text_file((dir / "values.csv").string(), e.values_csv);
  log << e.values_csv;
  return kOk;
}

inline int cmd_sweep(const CommonFlags& f, Log& log) {
  auto c = load_config(f, true);
  if (f.seed) throw UsageError("--seed is not accepted by sweep; list seeds under sweep.seeds");
  const int jobs = f.jobs > 0 ? f.jobs : c.sweep.jobs;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = experiment::run_sweep(c, jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto dir = output_dir(f, c);
  for (const auto& row : rows) experiment::write_training_outputs(dir / row.cell.key(), row.result);
  io::write_text_file((dir / "sweep.csv").string(), experiment::sweep_csv(rows));
  const auto summary = experiment::sweep_summary(rows);
  io::write_json_file((dir / "sweep_summary.json").string(), summary);
  write_run_info(dir, "sweep", secs);
  log << rows.size() << " cells, mean value gap " << summary["mean_value_gap"].dump() << ", "
      << summary["cells_with_positive_gap"].get<std::size_t>() << " positive\n";
  bool ok = true;
  for (const auto& row : rows) ok = ok && row.result.report["checks"][0]["pass"].get<bool>();
  return ok ? kOk : kCheckFailure;
}

}  // namespace detail

// Parses `args` (without the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Exact preference-optimization laboratory", "inspo_lab"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::vector<std::string> policy_files;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", flags.config, "experiment config JSON");
    if (config_required) opt->required();
    sub->add_option("--seed", flags.seed, "overrides dataset and shuffle seeds");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_flag("--quiet", flags.quiet, "suppress progress output");
  };
  auto* gen_model = app.add_subcommand("gen-model", "write the preference model, reference, and spaces");
  common(gen_model, false);
  auto* gen_data = app.add_subcommand("gen-data", "sample a preference dataset");
  common(gen_data, true);
  auto* train_cmd = app.add_subcommand("train", "train, evaluate, and write a report");
  common(train_cmd, true);
  auto* verify_cmd = app.add_subcommand("verify", "run the property and identity checks");
  common(verify_cmd, false);
  auto* evaluate_cmd = app.add_subcommand("evaluate", "value and win-rate tables for stored policies");
  common(evaluate_cmd, true);
  evaluate_cmd->add_option("--policy", policy_files, "policy JSON (repeatable)")->required();
  auto* sweep_cmd = app.add_subcommand("sweep", "grid over seeds and hyperparameters");
  common(sweep_cmd, true);
  sweep_cmd->add_option("--jobs", flags.jobs, "cells run concurrently")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  detail::Log log(out, flags.quiet);
  try {
    if (gen_model->parsed()) return detail::cmd_gen_model(flags, log);
    if (gen_data->parsed()) return detail::cmd_gen_data(flags, log);
    if (train_cmd->parsed()) return detail::cmd_train(flags, log);
    if (verify_cmd->parsed()) return detail::cmd_verify(flags, log, err);
    if (evaluate_cmd->parsed()) return detail::cmd_evaluate(flags, policy_files, log);
    if (sweep_cmd->parsed()) return detail::cmd_sweep(flags, log);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace inspo::cli
