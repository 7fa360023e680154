#include "openqmc/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "openqmc/btb.hpp"
#include "openqmc/dyson.hpp"
#include "openqmc/errors.hpp"

namespace openqmc {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string x;
  while (std::getline(ss, x, ',')) f.push_back(x);
  return f;
}

const char* kHeader = "n,t,re_g11,im_g11,re_g12,im_g12,re_g21,im_g21,re_g22,im_g22,obs";

}  // namespace

Trajectory run_method(Method method, const SolverSetup& setup) {
  switch (method) {
    case Method::BareDqmc: return run_bare_dqmc(setup);
    case Method::DysonDirect: return run_dyson_direct(setup);
    case Method::DysonReuse: return run_dyson_reuse(setup);
    case Method::Btb: return run_btb(setup);
  }
  throw std::logic_error("unknown method");
}

RunResult run_experiment(const RunConfig& config) {
  config.validate();
  RunResult r;
  r.config = config;
  r.b_bound_auto = !config.b_bound.has_value();
  r.b_bound = resolve_b_bound(config);
  r.trajectory = run_method(config.method, make_setup(config, r.b_bound));
  return r;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& s : traj.steps) {
    out << s.n << ',' << fmt(s.t);
    for (const auto& x : s.G.a) out << ',' << fmt(x.real()) << ',' << fmt(x.imag());
    out << ',' << fmt(s.obs) << '\n';
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  auto out = open_out(path);
  write_trajectory_csv(traj, out);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("reference", "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ConfigError("reference", "'" + path + "' has an unexpected header");
  Trajectory traj;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 11) throw ConfigError("reference", "row " + std::to_string(row) + " needs 11 fields");
    try {
      StepRecord s;
      s.n = std::stoi(f[0]);
      s.t = std::stod(f[1]);
      for (int q = 0; q < 4; ++q) s.G.a[q] = {std::stod(f[2 + 2 * q]), std::stod(f[3 + 2 * q])};
      s.obs = std::stod(f[10]);
      traj.steps.push_back(s);
    } catch (const std::logic_error&) {
      throw ConfigError("reference", "row " + std::to_string(row) + " is not numeric");
    }
  }
  return traj;
}

json run_metadata(const RunResult& r) {
  const Trajectory& traj = r.trajectory;
  json meta;
  meta["config"] = config_to_json(r.config, r.b_bound);
  meta["b_bound"] = r.b_bound;
  meta["b_bound_source"] = r.b_bound_auto ? "auto: max|B|/6 over 4096 points on [-2T, 2T]" : "config";
  meta["rho_s_default"] = r.config.rho_s_default;
  meta["correlation_table_intervals"] = r.config.b_table;
  meta["orders"] = traj.orders;
  json samples = json::array();
  for (const auto& s : traj.steps) samples.push_back(s.samples);
  meta["samples_per_step"] = samples;
  if (!traj.bold_samples.empty()) meta["bold_samples_per_step"] = traj.bold_samples;
  json wall = json::object();
  for (const auto& [k, v] : traj.wall_seconds) wall[k] = v;
  meta["wall_seconds"] = wall;
  meta["max_hermiticity_defect"] = traj.max_hermiticity_defect;
  meta["columns"] = kHeader;
  return meta;
}

void write_outputs(const RunResult& r) {
  write_trajectory_csv(r.trajectory, r.config.output);
  auto out = open_out(r.config.output + ".meta.json");
  out << run_metadata(r).dump(2) << '\n';
}

void write_bold_table_csv(const Trajectory& traj, double dt, const std::string& path) {
  auto out = open_out(path);
  out << "k,t,re_g11,im_g11,re_g12,im_g12,re_g21,im_g21,re_g22,im_g22\n";
  for (std::size_t k = 0; k < traj.bold_table.size(); ++k) {
    out << k << ',' << fmt(static_cast<double>(k) * dt);
    for (const auto& x : traj.bold_table[k].a) out << ',' << fmt(x.real()) << ',' << fmt(x.imag());
    out << '\n';
  }
}

VarianceResult variance_harness(const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                                const std::vector<double>& reference_dyson, const std::vector<double>& reference_btb) {
  if (seeds.size() < 2) throw ConfigError("repeats", "need at least 2 repeats");
  const std::size_t points = static_cast<std::size_t>(config.steps) + 1;
  if (reference_dyson.size() != points || reference_btb.size() != points)
    throw ConfigError("reference", "reference must have " + std::to_string(points) + " rows to match steps");
  const double bb = resolve_b_bound(config);
  VarianceResult v;
  v.seeds = seeds;
  v.var_dyson.assign(points, 0.0);
  v.var_btb.assign(points, 0.0);
  for (std::size_t n = 0; n < points; ++n) v.t.push_back(static_cast<double>(n) * config.dt);
  for (const auto seed : seeds) {
    RunConfig c = config;
    c.seed = seed;
    const SolverSetup setup = make_setup(c, bb);
    const auto d = run_dyson_reuse(setup).observable();
    const auto b = run_btb(setup).observable();
    for (std::size_t n = 0; n < points; ++n) {
      v.var_dyson[n] += (d[n] - reference_dyson[n]) * (d[n] - reference_dyson[n]);
      v.var_btb[n] += (b[n] - reference_btb[n]) * (b[n] - reference_btb[n]);
    }
  }
  for (std::size_t n = 0; n < points; ++n) {
    v.var_dyson[n] /= static_cast<double>(seeds.size());
    v.var_btb[n] /= static_cast<double>(seeds.size());
  }
  return v;
}

VarianceResult variance_harness(const RunConfig& config, int repeats, const std::vector<double>& reference_dyson,
                                const std::vector<double>& reference_btb) {
  if (repeats < 2) throw ConfigError("repeats", "need at least 2 repeats");
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < repeats; ++r) seeds.push_back(config.seed + static_cast<std::uint64_t>(r));
  return variance_harness(config, seeds, reference_dyson, reference_btb);
}

void write_variance_csv(const VarianceResult& v, const std::string& path) {
  auto out = open_out(path);
  out << "n,t,var_dyson,var_btb,ratio\n";
  for (std::size_t n = 0; n < v.t.size(); ++n) {
    const double ratio = v.var_btb[n] > 0.0 ? v.var_dyson[n] / v.var_btb[n] : std::nan("");
    out << n << ',' << fmt(v.t[n]) << ',' << fmt(v.var_dyson[n]) << ',' << fmt(v.var_btb[n]) << ',' << fmt(ratio)
        << '\n';
  }
}

}  // namespace openqmc
