#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "openqmc/config.hpp"
#include "openqmc/trajectory.hpp"

namespace openqmc {

struct RunResult {
  RunConfig config;
  double b_bound = 0.0;
  bool b_bound_auto = true;
  Trajectory trajectory;
};

// Dispatches to the configured solver. Throws ConfigError or NumericalError.
RunResult run_experiment(const RunConfig& config);

Trajectory run_method(Method method, const SolverSetup& setup);

void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

// Parses the CSV layout written above.
Trajectory read_trajectory_csv(const std::string& path);

nlohmann::json run_metadata(const RunResult& result);

// Writes the CSV at config.output and the metadata next to it as <output>.meta.json.
void write_outputs(const RunResult& result);

void write_bold_table_csv(const Trajectory& traj, double dt, const std::string& path);

struct VarianceResult {
  std::vector<double> t;
  std::vector<double> var_dyson;
  std::vector<double> var_btb;
  std::vector<std::uint64_t> seeds;
};

// Mean squared deviation from the references of dyson-reuse and btb runs, one run per seed.
VarianceResult variance_harness(const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                                const std::vector<double>& reference_dyson, const std::vector<double>& reference_btb);

// Seeds config.seed, config.seed + 1, ...
VarianceResult variance_harness(const RunConfig& config, int repeats, const std::vector<double>& reference_dyson,
                                const std::vector<double>& reference_btb);

void write_variance_csv(const VarianceResult& v, const std::string& path);

}  // namespace openqmc
