#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "openqmc/dyson.hpp"
#include "openqmc/errors.hpp"

using namespace openqmc;

namespace {

// <sigma_z(t)> from |1> under H = eps sigma_z + delta sigma_x, by hand: precession of the
// Bloch vector (0, 0, 1) about n = (delta, 0, eps) / r at angular frequency 2r.
double rabi_sigma_z(double eps, double delta, double t) {
  const double r2 = eps * eps + delta * delta;
  if (r2 == 0.0) return 1.0;
  const double nz2 = eps * eps / r2;
  return nz2 + (1.0 - nz2) * std::cos(2.0 * std::sqrt(r2) * t);
}

SolverSetup base_setup(double xi, double eps = 1.0, double delta = 1.0) {
  SolverSetup s;
  s.system.epsilon = eps;
  s.system.delta = delta;
  s.bath.xi = xi;
  s.dt = 0.05;
  s.steps = 60;
  s.budget = SampleBudget{1e4, 0.0970823, 3};
  s.b_table = 4096;
  return s;
}

double max_rabi_error(const Trajectory& tr, double eps, double delta) {
  double err = 0.0;
  for (const auto& r : tr.steps) err = std::max(err, std::abs(r.obs - rabi_sigma_z(eps, delta, r.t)));
  return err;
}

}  // namespace

TEST_CASE("heun step") {
  SystemSpec spec;
  spec.epsilon = 0.6;
  const Mat2 H = spec.hamiltonian();
  const Mat2 zero;
  CHECK(max_abs(heun_step(H, zero, zero, 0.05, spec) - H) < 1e-15);
  CHECK(max_abs(heun_step(Mat2::identity(), zero, zero, 0.05, spec) - Mat2::identity()) == 0.0);

  // without memory the step is I + dt A + dt^2 A^2 / 2 for A(G) = i[H, G]; the local error
  // against exact conjugation is dt^3 A^3(G) / 6 to leading order
  const Mat2 G = Mat2::from(0.3, cplx{0.2, -0.7}, cplx{0.2, 0.7}, -1.1);
  auto A = [&](const Mat2& X) { return kI * commutator(H, X); };
  for (double dt : {0.05, 0.025}) {
    const Mat2 U = matexp_herm(H, dt);
    const Mat2 err = heun_step(G, zero, zero, dt, spec) - U * G * adjoint(U);
    const Mat2 lead = (-std::pow(dt, 3) / 6.0) * A(A(A(G)));
    CHECK(max_abs(err - lead) < 0.1 * max_abs(lead));
  }
  const Mat2 step = heun_step(G, zero, zero, 0.05, spec);
  CHECK(max_abs(step - (G + 0.05 * A(G) + 0.00125 * A(A(G)))) < 1e-15);
  CHECK(hermiticity_defect(step) < 1e-14);

  const Mat2 K = Mat2::from(cplx{0.1, 0.3}, cplx{-0.4, 0.2}, cplx{0.5, 0.1}, cplx{0.0, -0.2});
  CHECK(hermiticity_defect(heun_step(G, K, 0.5 * K, 0.05, spec)) < 1e-14);
}

TEST_CASE("recurrence update") {
  MatGrid K{}, D{};
  K[0][1] = Mat2::from(1.0, 2.0, 3.0, 4.0);
  K[1][1] = sigma_x();
  D[1][0] = sigma_z();
  const CoeffsB id = coefficients_b(SystemSpec{}, 0.0);
  const MatGrid zero{};
  CHECK(recurrence_update(K, id, zero) == K);
  CHECK(recurrence_update(zero, coefficients_b(SystemSpec{}, 0.3), D) == D);
}

TEST_CASE("zero coupling reproduces free evolution for every solver") {
  for (double eps : {0.0, 1.0}) {
    SolverSetup s = base_setup(0.0, eps);
    s.budget.Bbound = 0.0;
    const ModelContext ctx(s);
    const MatGrid D = estimate_D_shell(ctx, 5);
    for (const auto& row : D)
      for (const auto& x : row) CHECK(max_abs(x) == 0.0);

    // Heun iteration of dG/dt = i[H, G] written out directly
    const Mat2 H = s.system.hamiltonian();
    auto A = [&](const Mat2& X) { return kI * commutator(H, X); };
    std::vector<Mat2> oracle{s.system.Os};
    for (int n = 0; n < s.steps; ++n) {
      const Mat2& g = oracle.back();
      oracle.push_back(g + s.dt * A(g) + (0.5 * s.dt * s.dt) * A(A(g)));
    }
    for (const auto& tr : {run_dyson_direct(s), run_dyson_reuse(s)}) {
      for (std::size_t n = 0; n < tr.steps.size(); ++n) CHECK(max_abs(tr.steps[n].G - oracle[n]) < 1e-12);
    }
    s.budget.Mbar = 4;
    // the leading term is exact
    CHECK(max_rabi_error(run_bare_dqmc(s), eps, 1.0) < 1e-12);
  }
}

TEST_CASE("zero coupling error shrinks at second order in dt") {
  SolverSetup s = base_setup(0.0, 1.0);
  s.budget.Bbound = 0.0;
  const double coarse = max_rabi_error(run_dyson_reuse(s), 1.0, 1.0);
  s.dt = 0.025;
  s.steps = 120;
  const double fine = max_rabi_error(run_dyson_reuse(s), 1.0, 1.0);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("bare series at t = 0 is the observable") {
  SolverSetup s = base_setup(0.2);
  const ModelContext ctx(s);
  CHECK(max_abs(bare_dqmc_at(ctx, 0.0, 4) - s.system.Os) == 0.0);
  CHECK_THROWS_AS(bare_dqmc_at(ctx, 0.5, 3), std::invalid_argument);
}

TEST_CASE("first-order quadrature satisfies the recurrence identity") {
  SolverSetup s = base_setup(0.2);
  s.budget.Mbar = 1;
  s.steps = 20;
  const ModelContext ctx(s);
  for (int panels : {4, 16}) {
    double worst = 0.0;
    for (int n = 0; n < s.steps; ++n) {
      const auto Kn = k1_quadrature(ctx, n, panels);
      const auto Kn1 = k1_quadrature(ctx, n + 1, panels);
      const MatGrid rhs = recurrence_update(Kn.Kij, ctx.b, k1_quadrature_shell(ctx, n, panels));
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) worst = std::max(worst, max_abs(Kn1.Kij[i][j] - rhs[i][j]));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("quadrature converges at second order") {
  SolverSetup s = base_setup(0.2);
  s.steps = 20;
  const ModelContext ctx(s);
  const Mat2 fine = k1_quadrature(ctx, 20, 256).K;
  const double e1 = max_abs(k1_quadrature(ctx, 20, 8).K - fine);
  const double e2 = max_abs(k1_quadrature(ctx, 20, 16).K - fine);
  CHECK(e2 < e1);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("first-order Monte Carlo agrees with quadrature") {
  SolverSetup s = base_setup(0.2);
  s.budget = SampleBudget{2e4, 0.0970823, 1};
  s.steps = 20;
  const Mat2 quad = k1_quadrature(ModelContext(s), 20, 64).K;
  const int seeds = 12;
  std::vector<Mat2> est;
  for (int q = 0; q < seeds; ++q) {
    s.seed = 100 + q;
    est.push_back(estimate_K_full(ModelContext(s), 20));
  }
  for (int e = 0; e < 4; ++e) {
    for (int part = 0; part < 2; ++part) {
      double mean = 0.0, sq = 0.0;
      for (const auto& x : est) mean += (part ? x.a[e].imag() : x.a[e].real()) / seeds;
      for (const auto& x : est) sq += std::pow((part ? x.a[e].imag() : x.a[e].real()) - mean, 2);
      const double se = std::sqrt(sq / (seeds - 1) / seeds);
      const double target = part ? quad.a[e].imag() : quad.a[e].real();
      CHECK(std::abs(mean - target) <= 4.0 * se + 1e-12);
    }
  }
}

TEST_CASE("reuse and direct agree exactly in quadrature mode") {
  SolverSetup s = base_setup(0.2);
  s.budget.Mbar = 1;
  s.steps = 30;
  const DysonOptions q{Estimator::Quadrature, 2000};
  const auto a = run_dyson_direct(s, q);
  const auto b = run_dyson_reuse(s, q);
  for (std::size_t n = 0; n < a.steps.size(); ++n) CHECK(max_abs(a.steps[n].G - b.steps[n].G) < 1e-10);
  s.budget.Mbar = 3;
  CHECK_THROWS_AS(run_dyson_reuse(s, q), std::invalid_argument);
}

TEST_CASE("pure dephasing keeps sigma_z constant on average") {
  SolverSetup s = base_setup(0.2, 0.5, 0.0);
  s.budget.M0 = 1e4;
  const int seeds = 10;
  for (bool reuse : {false, true}) {
    double mean = 0.0, sq = 0.0;
    std::vector<double> end;
    for (int q = 0; q < seeds; ++q) {
      s.seed = 40 + q;
      const auto tr = reuse ? run_dyson_reuse(s) : run_dyson_direct(s);
      // G stays diagonal
      for (const auto& r : tr.steps) CHECK(std::abs(r.G(0, 1)) < 1e-12);
      end.push_back(tr.steps.back().obs - 1.0);
    }
    for (double x : end) mean += x / seeds;
    for (double x : end) sq += (x - mean) * (x - mean);
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(sq / (seeds - 1) / seeds));
  }
}

TEST_CASE("trajectories stay Hermitian and start at the observable") {
  SolverSetup s = base_setup(0.2);
  for (auto tr : {run_dyson_direct(s), run_dyson_reuse(s)}) {
    CHECK(tr.max_hermiticity_defect <= 1e-12);
    CHECK(tr.steps.front().G == s.system.Os);
    CHECK(tr.steps.size() == 61);
    CHECK(tr.orders == std::vector<int>{1, 3});
  }
  s.budget.Mbar = 4;
  const Trajectory bare = run_bare_dqmc(s);
  CHECK(bare.max_hermiticity_defect <= 1e-12);
  for (const auto& st : bare.steps) CHECK(st.obs == doctest::Approx(expected_observable(st.G, s.system.rho_s)));
}

TEST_CASE("results do not depend on the thread count") {
  SolverSetup s = base_setup(0.2);
  s.steps = 20;
  const auto a = run_dyson_reuse(s);
  s.threads = 3;
  const auto b = run_dyson_reuse(s);
  for (std::size_t n = 0; n < a.steps.size(); ++n) CHECK(a.steps[n].G == b.steps[n].G);
  s.budget.Mbar = 2;
  s.threads = 1;
  const auto c = run_bare_dqmc(s);
  s.threads = 4;
  const auto d = run_bare_dqmc(s);
  for (std::size_t n = 0; n < c.steps.size(); ++n) CHECK(c.steps[n].G == d.steps[n].G);
}

TEST_CASE("weak coupling: bare series, direct and reuse agree statistically at t = 1") {
  SolverSetup s = base_setup(0.2);
  s.steps = 20;
  s.budget.M0 = 1e4;
  const int seeds = 8;
  std::vector<double> reuse, direct, bare;
  for (int q = 0; q < seeds; ++q) {
    s.seed = 500 + q;
    s.budget.Mbar = 3;
    reuse.push_back(run_dyson_reuse(s).steps.back().obs);
    direct.push_back(run_dyson_direct(s).steps.back().obs);
    s.budget.Mbar = 4;
    const ModelContext ctx(s);
    bare.push_back(expected_observable(0.5 * (bare_dqmc_at(ctx, 1.0, 4) + adjoint(bare_dqmc_at(ctx, 1.0, 4))),
                                       s.system.rho_s));
  }
  auto stats = [&](const std::vector<double>& v) {
    double m = 0.0, sq = 0.0;
    for (double x : v) m += x / v.size();
    for (double x : v) sq += (x - m) * (x - m);
    return std::pair<double, double>{m, sq / (v.size() - 1) / v.size()};
  };
  const auto [mr, vr] = stats(reuse);
  const auto [md, vd] = stats(direct);
  const auto [mb, vb] = stats(bare);
  CHECK(std::abs(mr - md) <= 3.0 * std::sqrt(vr + vd) + 1e-3);
  CHECK(std::abs(mr - mb) <= 3.0 * std::sqrt(vr + vb) + 1e-2);
}
