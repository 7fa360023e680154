#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "openqmc/trajectory.hpp"

namespace openqmc {

enum class Method { BareDqmc, DysonDirect, DysonReuse, Btb };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct RunConfig {
  Method method = Method::DysonReuse;
  SystemSpec system;
  std::string observable = "sigma_z";
  std::string ws = "sigma_z";
  std::string rho_s = "up";
  bool rho_s_default = true;
  BathSpec bath;
  double dt = 0.05;
  int steps = 60;
  int mbar = 5;
  double m0 = 1e5;
  std::optional<double> b_bound;  // empty: one sixth of max |B| over the horizon
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output = "trajectory.csv";
  int b_table = 0;  // interpolated B table intervals, 0 for direct evaluation

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

// Builds a config from a flat key-value object; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& doc);

// Flat TOML subset: key = value lines with strings, numbers, booleans and arrays.
nlohmann::json parse_flat_toml(const std::string& text);

// Reads a .json or .toml file (by extension; other names are tried as JSON, then TOML).
RunConfig load_config(const std::string& path);

// Resolved config as written to metadata.
nlohmann::json config_to_json(const RunConfig& config, double b_bound);

// Matrix spelled as a name or as a row-major list of 4 entries (number or [re, im]).
Mat2 parse_matrix(const nlohmann::json& value, const std::string& field, bool density);

double resolve_b_bound(const RunConfig& config);
SolverSetup make_setup(const RunConfig& config, double b_bound);

}  // namespace openqmc
