#pragma once

#include <cstdint>
#include <vector>

#include "openqmc/trajectory.hpp"

namespace openqmc {

enum class Estimator { MonteCarlo, Quadrature };

struct DysonOptions {
  Estimator estimator = Estimator::MonteCarlo;
  int quadrature_points = 10000;  // trapezoid nodes across [-T, T]; Quadrature needs Mbar = 1
};

// Trapezoid panels per time step for a quadrature budget.
int quadrature_panels(const SolverSetup& setup, int quadrature_points);

// Heun predictor-corrector for dG/dt = i[H, G] + W K + (W K)^dagger.
Mat2 heun_step(const Mat2& Gn, const Mat2& Kn, const Mat2& Kn1, double dt, const SystemSpec& spec);

// K'_ij = sum_kl b(i, j, k, l) K_kl + D_ij
MatGrid recurrence_update(const MatGrid& K, const CoeffsB& b, const MatGrid& D);

// Basis accumulators over the shell added by step n -> n+1. `counts` receives samples per odd order.
MatGrid estimate_D_shell(const ModelContext& ctx, int n, std::vector<std::int64_t>* counts = nullptr);

// K at t_n from fresh samples of the whole simplex.
Mat2 estimate_K_full(const ModelContext& ctx, int n, std::vector<std::int64_t>* counts = nullptr);

// Bare series estimate of G(-t, t) truncated at even order mbar.
Mat2 bare_dqmc_at(const ModelContext& ctx, double t, int mbar, std::vector<std::int64_t>* counts = nullptr,
                  std::uint32_t stream_step = 0);

struct QuadratureK {
  Mat2 K;
  MatGrid Kij{};
};

// First-order kernel at t_n by composite trapezoid with `panels` per time step.
QuadratureK k1_quadrature(const ModelContext& ctx, int n, int panels);

// First-order basis accumulators over the band [-dt, dt] at t_{n+1}, on the same grid.
MatGrid k1_quadrature_shell(const ModelContext& ctx, int n, int panels);

Trajectory run_dyson_direct(const SolverSetup& setup, const DysonOptions& options = {});
Trajectory run_dyson_reuse(const SolverSetup& setup, const DysonOptions& options = {});

// Bare series at every output time; Mbar in the budget must be even.
Trajectory run_bare_dqmc(const SolverSetup& setup);

}  // namespace openqmc
