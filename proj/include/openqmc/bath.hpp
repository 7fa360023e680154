#pragma once

#include <vector>

#include "openqmc/mat2.hpp"

namespace openqmc {

// Ohmic bath discretized into L harmonic modes.
struct BathSpec {
  int L = 400;
  double omega_c = 2.5;
  double omega_max = 10.0;
  double xi = 0.2;
  double beta = 5.0;

  void validate() const;
};

struct BathModes {
  std::vector<double> omega;
  std::vector<double> c;
};

BathModes discretize_bath(const BathSpec& spec);

// B(tau1, tau2), which depends only on |tau1| - |tau2|.
cplx correlation_B(const BathModes& modes, double beta, double tau1, double tau2);

// One sixth of the largest |B| over a uniform grid of dtau in [-horizon, horizon].
double estimate_B_bound(const BathModes& modes, double beta, double horizon, int grid_points = 4096);

// Largest number of time points in a single diagram.
inline constexpr int kMaxPoints = 16;

// Correlation evaluator with per-mode weights precomputed. Immutable once built,
// except for enable_table which must run before concurrent use.
class Correlation {
 public:
  Correlation() = default;
  Correlation(const BathModes& modes, double beta);

  cplx operator()(double tau1, double tau2) const { return at(std::abs(tau1) - std::abs(tau2)); }
  cplx at(double dtau) const;
  cplx exact(double dtau) const;

  // Fills out[a * n + b] = B(points[a], points[b]) for a < b.
  void pairwise(const double* points, int n, cplx* out) const;

  // Switches evaluation to linear interpolation on a uniform dtau grid.
  void enable_table(double max_abs_dtau, int intervals);
  bool tabulated() const { return !table_.empty(); }

  bool vanishes() const { return zero_; }
  std::size_t size() const { return omega_.size(); }

 private:
  std::vector<double> omega_;
  std::vector<double> wc_;  // (c^2 / 2 omega) coth(beta omega / 2)
  std::vector<double> ws_;  // c^2 / 2 omega
  bool zero_ = true;

  std::vector<cplx> table_;
  double table_lo_ = 0.0;
  double table_inv_h_ = 0.0;
};

}  // namespace openqmc
