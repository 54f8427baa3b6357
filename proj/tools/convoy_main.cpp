// Command-line front end: run one scenario, compare controllers, or sweep a
// config key, writing trajectory CSVs and metric reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "convoy/config.hpp"
#include "convoy/metrics.hpp"
#include "convoy/sim.hpp"

namespace {

namespace fs = std::filesystem;
using convoy::ConfigError;
using convoy::ConvoyConfig;
using convoy::MetricsReport;
using convoy::RunResult;

constexpr const char* kVersion = "convoy 1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitAborted = 2;

struct RunOutput {
  MetricsReport metrics;
  bool aborted{false};
};

RunOutput run_to_dir(const ConvoyConfig& config, std::uint64_t seed,
                     const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const RunResult result = convoy::run(config, seed);

  {
    std::ofstream csv(out_dir / "trajectory.csv");
    convoy::write_csv(result.log, csv);
  }
  {
    std::ofstream json_out(out_dir / "metrics.json");
    json_out << result.metrics.to_json();
  }
  if (result.aborted) {
    std::cerr << "run aborted: " << result.abort_reason << "\n";
  }
  return RunOutput{result.metrics, result.aborted};
}

int cmd_run(const std::string& config_path, std::uint64_t seed,
            bool seed_given, const std::string& out_dir,
            const std::vector<std::string>& overrides) {
  ConvoyConfig config = convoy::load_config(config_path, overrides);
  if (!seed_given) seed = config.seed;
  const RunOutput out = run_to_dir(config, seed, out_dir);
  return out.aborted ? kExitAborted : kExitOk;
}

const std::vector<std::pair<std::string, double MetricsReport::*>> kTableRows =
    {{"Mean Err.", &MetricsReport::mean_err_cm},
     {"RMSE", &MetricsReport::rmse_cm},
     {"Std. Dev.", &MetricsReport::std_dev_cm},
     {"Max Err.", &MetricsReport::max_err_cm},
     {"Lead. RMSE", &MetricsReport::leader_rmse_cm},
     {"Lead. Max Err.", &MetricsReport::leader_max_cm},
     {"Fol. RMSE", &MetricsReport::follower_rmse_cm},
     {"Fol. Max Err.", &MetricsReport::follower_max_cm}};

int cmd_compare(const std::string& config_path,
                const std::string& controllers_csv, int trials,
                std::uint64_t seed_base, bool seed_given,
                const std::string& out_dir,
                const std::vector<std::string>& overrides) {
  if (trials < 1) {
    throw ConfigError("compare: trials must be >= 1");
  }
  std::vector<std::string> controllers;
  std::stringstream ss(controllers_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) controllers.push_back(item);
  }
  if (controllers.empty()) {
    throw ConfigError("compare: no controllers given");
  }

  const ConvoyConfig base = convoy::load_config(config_path, overrides);
  if (!seed_given) seed_base = base.seed;

  bool any_abort = false;
  nlohmann::ordered_json table;
  std::map<std::string, std::vector<MetricsReport>> metrics_by_controller;

  for (const std::string& name : controllers) {
    std::vector<std::string> ov = overrides;
    ov.push_back("controller=" + name);
    const ConvoyConfig config = convoy::load_config(config_path, ov);
    for (int t = 0; t < trials; ++t) {
      const fs::path dir =
          fs::path(out_dir) / name / ("trial_" + std::to_string(t));
      const RunOutput out = run_to_dir(config, seed_base + t, dir);
      metrics_by_controller[name].push_back(out.metrics);
      any_abort = any_abort || out.aborted;
    }
  }

  // Aggregate by mean over trials, preserving controller order.
  fs::create_directories(out_dir);
  std::ostringstream text;
  text << std::left;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-16s", "Metric (cm)");
  text << buf;
  for (const std::string& name : controllers) {
    std::snprintf(buf, sizeof(buf), "%12s", name.c_str());
    text << buf;
  }
  text << "\n";

  for (const auto& [label, member] : kTableRows) {
    std::snprintf(buf, sizeof(buf), "%-16s", label.c_str());
    text << buf;
    for (const std::string& name : controllers) {
      const auto& runs = metrics_by_controller[name];
      double sum = 0.0;
      bool aborted = false;
      for (const MetricsReport& m : runs) {
        sum += m.*member;
        aborted = aborted || m.aborted;
      }
      const double mean = sum / static_cast<double>(runs.size());
      if (aborted) {
        std::snprintf(buf, sizeof(buf), "%12s", "aborted");
      } else {
        std::snprintf(buf, sizeof(buf), "%12s",
                      convoy::format_6sig(convoy::round_6sig(mean)).c_str());
      }
      text << buf;
    }
    text << "\n";
  }

  for (const std::string& name : controllers) {
    nlohmann::ordered_json per;
    const auto& runs = metrics_by_controller[name];
    nlohmann::ordered_json trials_json = nlohmann::ordered_json::array();
    for (const MetricsReport& m : runs) {
      trials_json.push_back(nlohmann::ordered_json::parse(m.to_json()));
    }
    per["trials"] = trials_json;
    nlohmann::ordered_json mean;
    for (const auto& [label, member] : kTableRows) {
      double sum = 0.0;
      for (const MetricsReport& m : runs) sum += m.*member;
      std::string key = label;
      (void)key;
      sum /= static_cast<double>(runs.size());
      mean[label] = convoy::round_6sig(sum);
    }
    per["mean"] = mean;
    table[name] = per;
  }

  {
    std::ofstream json_out(fs::path(out_dir) / "compare.json");
    json_out << table.dump(2) << "\n";
  }
  {
    std::ofstream text_out(fs::path(out_dir) / "compare.txt");
    text_out << text.str();
  }
  std::cout << text.str();
  return any_abort ? kExitAborted : kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& key,
              const std::string& values_csv, const std::string& controller,
              std::uint64_t seed, bool seed_given, const std::string& out_dir,
              const std::vector<std::string>& overrides) {
  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) {
      throw ConfigError("sweep: value is not numeric: " + item);
    }
    values.push_back(v);
  }
  if (values.empty()) {
    throw ConfigError("sweep: empty value list");
  }

  bool any_abort = false;
  std::vector<std::pair<double, MetricsReport>> results;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<std::string> ov = overrides;
    if (!controller.empty()) ov.push_back("controller=" + controller);
    ov.push_back(key + "=" + convoy::format_6sig(values[i]));
    const ConvoyConfig config = convoy::load_config(config_path, ov);
    const std::uint64_t run_seed = seed_given ? seed : config.seed;
    const fs::path dir = fs::path(out_dir) / ("value_" + std::to_string(i));
    const RunOutput out = run_to_dir(config, run_seed, dir);
    results.emplace_back(values[i], out.metrics);
    any_abort = any_abort || out.aborted;
  }

  fs::create_directories(out_dir);
  std::ofstream summary(fs::path(out_dir) / "summary.csv");
  summary << "value,rmse_cm,max_err_cm\n";
  for (const auto& [value, metrics] : results) {
    summary << convoy::format_6sig(value) << ','
            << convoy::format_6sig(metrics.rmse_cm) << ','
            << convoy::format_6sig(metrics.max_err_cm) << '\n';
  }
  return any_abort ? kExitAborted : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convoy path-tracking simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;

  CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("--config", config_path, "Scenario config (JSON)")
      ->required();
  auto* run_seed_opt = run_cmd->add_option("--seed", seed, "Random seed");
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--set", overrides,
                      "Override config key (dotted.key=value)");

  std::string controllers = "dmpc,cmpc,piloc,pireflec";
  int trials = 3;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Compare controllers over trials");
  compare_cmd->add_option("--config", config_path, "Scenario config (JSON)")
      ->required();
  compare_cmd->add_option("--controllers", controllers,
                          "Comma-separated controller list");
  compare_cmd->add_option("--trials", trials, "Trials per controller");
  auto* compare_seed_opt =
      compare_cmd->add_option("--seed", seed, "Base seed");
  compare_cmd->add_option("--out", out_dir, "Output directory");
  compare_cmd->add_option("--set", overrides,
                          "Override config key (dotted.key=value)");

  std::string sweep_key;
  std::string sweep_values;
  std::string sweep_controller;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Sweep one numeric config key");
  sweep_cmd->add_option("--config", config_path, "Scenario config (JSON)")
      ->required();
  sweep_cmd->add_option("--key", sweep_key, "Dotted config key")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")
      ->required();
  sweep_cmd->add_option("--controller", sweep_controller, "Controller name");
  auto* sweep_seed_opt = sweep_cmd->add_option("--seed", seed, "Random seed");
  sweep_cmd->add_option("--out", out_dir, "Output directory");
  sweep_cmd->add_option("--set", overrides,
                        "Override config key (dotted.key=value)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return cmd_run(config_path, seed, run_seed_opt->count() > 0, out_dir,
                     overrides);
    }
    if (compare_cmd->parsed()) {
      return cmd_compare(config_path, controllers, trials, seed,
                         compare_seed_opt->count() > 0, out_dir, overrides);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(config_path, sweep_key, sweep_values, sweep_controller,
                       seed, sweep_seed_opt->count() > 0, out_dir, overrides);
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
