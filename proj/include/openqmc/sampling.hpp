#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "openqmc/rng.hpp"

namespace openqmc {

struct SampleBudget {
  double M0 = 1e4;
  double Bbound = 0.0;
  int Mbar = 5;

  void validate() const;
};

enum class CountKind { DysonFull, Shell, Inchworm };

// s -> s + dt for s >= 0, s -> s - dt for s < 0.
std::vector<double> shift_map(std::span<const double> points, double dt);

// m sorted i.i.d. Uniform(lo, hi) draws written to out[0..m).
void sample_simplex(int m, double lo, double hi, RngStream& rng, double* out);
std::vector<double> sample_simplex(int m, double lo, double hi, RngStream& rng);

// Uniform on {-t_prev-dt <= s <= t_prev+dt : some |s_j| <= dt}, sorted. Draws the number of
// points inside the band first, then places them. Returns that number.
int sample_shell(int m, double t_prev, double dt, RngStream& rng, double* out);
std::vector<double> sample_shell(int m, double t_prev, double dt, RngStream& rng);

double double_factorial(int n);
double factorial(int n);

// width^m / m!
double simplex_volume(int m, double width);

// ((2 t_{n+1})^m - (2 t_n)^m) / m!, the volume of the shell added by step n -> n+1.
double shell_volume(int m, int n, double dt);

// Samples per order. DysonFull at t_n; Shell for the step t_n -> t_{n+1}; Inchworm at t_n.
std::int64_t sample_count(CountKind kind, int n, int m, double dt, const SampleBudget& budget);

// Bare series at time t for even m: M0 (2t)^m / m! (m-1)!! B^{m/2}.
std::int64_t bare_sample_count(int m, double t, const SampleBudget& budget);

}  // namespace openqmc
