// Command-line driver: run, variance, pairings count.
#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "openqmc/config.hpp"
#include "openqmc/errors.hpp"
#include "openqmc/experiment.hpp"
#include "openqmc/pairings.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct RunArgs {
  std::string config;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output;
  std::optional<int> b_table;
  std::optional<std::string> bold_table;
};

struct VarianceArgs {
  std::string config;
  int repeats = 0;
  std::string reference;
  std::optional<std::string> reference_btb;
  std::optional<std::string> output;
  std::optional<int> threads;
  std::optional<int> b_table;
};

struct PairingArgs {
  int m = 0;
  std::optional<int> ell;
  std::string family = "all";
};

openqmc::RunConfig apply_overrides(openqmc::RunConfig c, const std::optional<std::string>& method,
                                   const std::optional<std::uint64_t>& seed, const std::optional<int>& threads,
                                   const std::optional<std::string>& output, const std::optional<int>& b_table) {
  if (method) {
    c.method = openqmc::parse_method(*method);
    if (c.method == openqmc::Method::BareDqmc && c.mbar % 2 != 0) c.mbar += 1;
  }
  if (seed) c.seed = *seed;
  if (threads) c.threads = *threads;
  if (output) c.output = *output;
  if (b_table) c.b_table = *b_table;
  c.validate();
  return c;
}

int cmd_run(const RunArgs& a) {
  auto cfg = apply_overrides(openqmc::load_config(a.config), a.method, a.seed, a.threads, a.output, a.b_table);
  const auto result = openqmc::run_experiment(cfg);
  openqmc::write_outputs(result);
  if (a.bold_table) {
    if (result.trajectory.bold_table.empty()) throw openqmc::ConfigError("bold-table", "only the btb method has a bold table");
    openqmc::write_bold_table_csv(result.trajectory, cfg.dt, *a.bold_table);
  }
  const auto& last = result.trajectory.steps.back();
  std::cout << openqmc::to_string(cfg.method) << ": " << result.trajectory.steps.size() << " rows to " << cfg.output
            << ", obs(" << last.t << ") = " << last.obs << ", B bound = " << result.b_bound << "\n";
  return 0;
}

int cmd_variance(const VarianceArgs& a) {
  auto cfg = apply_overrides(openqmc::load_config(a.config), std::nullopt, std::nullopt, a.threads, a.output, a.b_table);
  const auto ref_d = openqmc::read_trajectory_csv(a.reference).observable();
  const auto ref_b = a.reference_btb ? openqmc::read_trajectory_csv(*a.reference_btb).observable() : ref_d;
  const auto v = openqmc::variance_harness(cfg, a.repeats, ref_d, ref_b);
  openqmc::write_variance_csv(v, cfg.output);
  std::cout << "variance at t = " << v.t.back() << ": dyson " << v.var_dyson.back() << ", btb " << v.var_btb.back()
            << " -> " << cfg.output << "\n";
  return 0;
}

int cmd_pairings(const PairingArgs& a) {
  using openqmc::PairingKind;
  const PairingKind kind = openqmc::parse_pairing_kind(a.family);
  if (a.m < 2 || a.m % 2 != 0 || a.m > openqmc::kMaxPoints)
    throw openqmc::ConfigError("m", "must be even in 2.." + std::to_string(openqmc::kMaxPoints));
  if (kind != PairingKind::BTB) {
    if (a.ell) throw openqmc::ConfigError("ell", "only applies to the btb family");
    const auto& set = openqmc::pairing_table({kind, a.m, 1});
    std::cout << set.size() << "\n";
    return 0;
  }
  if (a.ell) {
    if (*a.ell < 1 || *a.ell > a.m) throw openqmc::ConfigError("ell", "must lie in 1..m");
    std::cout << openqmc::pairing_table({kind, a.m, *a.ell}).size() << "\n";
    return 0;
  }
  std::size_t lo = SIZE_MAX, hi = 0;
  for (int ell = 1; ell <= a.m; ++ell) {
    const std::size_t n = openqmc::pairing_table({kind, a.m, ell}).size();
    std::cout << "ell=" << ell << " " << n << "\n";
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  std::cout << "min " << lo << " max " << hi << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagrammatic Monte Carlo for the spin-boson model"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one trajectory");
  run_cmd->add_option("--config", run.config, "JSON or TOML config file")->required();
  run_cmd->add_option("--method", run.method, "bare-dqmc | dyson-direct | dyson-reuse | btb");
  run_cmd->add_option("--seed", run.seed, "RNG seed");
  run_cmd->add_option("--threads", run.threads, "Worker threads");
  run_cmd->add_option("--output", run.output, "Output CSV path");
  run_cmd->add_option("--b-table", run.b_table, "Intervals of an interpolated B table (0: direct)");
  run_cmd->add_option("--bold-table", run.bold_table, "Also write the BTB bold table to this CSV");

  VarianceArgs var;
  auto* var_cmd = app.add_subcommand("variance", "Variance of dyson-reuse and btb against a reference");
  var_cmd->add_option("--config", var.config, "JSON or TOML config file")->required();
  var_cmd->add_option("--repeats", var.repeats, "Independent runs per method")->required();
  var_cmd->add_option("--reference", var.reference, "Reference trajectory CSV")->required();
  var_cmd->add_option("--reference-btb", var.reference_btb, "Separate reference for btb");
  var_cmd->add_option("--output", var.output, "Output CSV path");
  var_cmd->add_option("--threads", var.threads, "Worker threads");
  var_cmd->add_option("--b-table", var.b_table, "Intervals of an interpolated B table (0: direct)");

  PairingArgs pair;
  auto* pair_cmd = app.add_subcommand("pairings", "Pairing enumeration");
  pair_cmd->require_subcommand(1);
  auto* count_cmd = pair_cmd->add_subcommand("count", "Count pairings in a family");
  count_cmd->add_option("--m", pair.m, "Number of time points (even)")->required();
  count_cmd->add_option("--ell", pair.ell, "BTB split index");
  count_cmd->add_option("--family", pair.family, "all | connected | btb")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*var_cmd) return cmd_variance(var);
    if (*count_cmd) return cmd_pairings(pair);
  } catch (const openqmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const openqmc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
