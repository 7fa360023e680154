#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "openqmc/bath.hpp"
#include "openqmc/mat2.hpp"
#include "openqmc/sampling.hpp"
#include "openqmc/system.hpp"

namespace openqmc {

// Everything a solver needs; Bbound in `budget` is already resolved.
struct SolverSetup {
  SystemSpec system;
  BathSpec bath;
  double dt = 0.05;
  int steps = 60;
  SampleBudget budget;
  std::uint64_t seed = 1;
  int threads = 1;
  int b_table = 0;  // intervals of the interpolated B table; 0 evaluates B directly

  double horizon() const { return steps * dt; }
  void validate() const;
};

// Derived, read-only state shared by all samples of a run.
struct ModelContext {
  explicit ModelContext(const SolverSetup& setup);

  SolverSetup setup;
  SystemKernel kernel;
  Correlation corr;
  CoeffsA a;
  CoeffsB b;

  double t(int n) const { return n * setup.dt; }
};

struct StepRecord {
  int n = 0;
  double t = 0.0;
  Mat2 G;
  double obs = 0.0;
  std::vector<std::int64_t> samples;  // per entry of Trajectory::orders, drawn to reach this step
};

struct Trajectory {
  std::string method;
  std::vector<int> orders;
  std::vector<StepRecord> steps;
  std::vector<std::vector<std::int64_t>> bold_samples;  // bold pre-solve, per step and order
  std::vector<Mat2> bold_table;                          // G(k dt) from the pre-solve, BTB only
  double max_hermiticity_defect = 0.0;
  std::vector<std::pair<std::string, double>> wall_seconds;

  std::vector<double> observable() const;
};

// Re tr(rho G); both inputs must be Hermitian.
double expected_observable(const Mat2& G, const Mat2& rho);

// Analytic <O(t)> with no bath coupling: tr(rho e^{itH} O e^{-itH}).
double free_observable(const SystemSpec& spec, double t);

}  // namespace openqmc
