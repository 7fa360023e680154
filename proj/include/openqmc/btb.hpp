#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "openqmc/trajectory.hpp"

namespace openqmc {

// Linear interpolation of g[k] ~ G(k dt) at s in [0, (g.size() - 1) dt].
Mat2 interpolate_bold(std::span<const Mat2> g, double dt, double s);

// Tabulated one-sided bold propagator G(k dt), k = 0..N.
class BoldTable {
 public:
  BoldTable() = default;
  BoldTable(double dt, std::vector<Mat2> values);

  double dt() const { return dt_; }
  double horizon() const { return dt_ * static_cast<double>(g_.size() - 1); }
  const std::vector<Mat2>& values() const { return g_; }
  Mat2 operator[](std::size_t k) const { return g_.at(k); }

  // Throws NumericalError beyond the horizon.
  Mat2 interpolate(double s) const { return interpolate_bold(g_, dt_, s); }

 private:
  double dt_ = 0.0;
  std::vector<Mat2> g_;
};

// Heun march of the bold propagator with connected diagrams. `counts` receives, per step,
// the samples of both stages for each odd order.
BoldTable solve_bold_propagator(const ModelContext& ctx, std::vector<std::vector<std::int64_t>>* counts = nullptr);

// Bold segment for a non-crossing interval; the thin basis segment when s_i < 0 <= s_f.
Mat2 btb_basis_propagator(const BoldTable& table, const SystemSpec& spec, int i, int j, double s_i, double s_f);

Mat2 btb_system_functional(const BoldTable& table, const SystemSpec& spec, double t, std::span<const double> points,
                           int i, int j);

// BTB basis accumulators over the shell added by step n -> n+1.
MatGrid estimate_D_shell_btb(const ModelContext& ctx, const BoldTable& table, int n,
                             std::vector<std::int64_t>* counts = nullptr);

Trajectory run_btb(const SolverSetup& setup);

// Same march with a supplied table, skipping the pre-solve.
Trajectory run_btb_with_table(const SolverSetup& setup, const BoldTable& table);

}  // namespace openqmc
