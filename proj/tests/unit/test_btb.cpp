#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "openqmc/btb.hpp"
#include "openqmc/dyson.hpp"
#include "openqmc/errors.hpp"

using namespace openqmc;

namespace {

std::mt19937_64& gen() {
  static std::mt19937_64 g(99);
  return g;
}

double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen()); }

SolverSetup base_setup(double xi, double eps = 1.0) {
  SolverSetup s;
  s.system.epsilon = eps;
  s.system.delta = 1.0;
  s.bath.xi = xi;
  s.dt = 0.05;
  s.steps = 60;
  s.budget = SampleBudget{1e4, 0.0970823, 3};
  s.b_table = 4096;
  return s;
}

Mat2 random_matrix() {
  return Mat2::from(cplx{uni(-1, 1), uni(-1, 1)}, cplx{uni(-1, 1), uni(-1, 1)}, cplx{uni(-1, 1), uni(-1, 1)},
                    cplx{uni(-1, 1), uni(-1, 1)});
}

// First-order bold march with the memory integral done by the trapezoid rule on `sub`
// panels per time step.
std::vector<Mat2> bold_first_order_oracle(const SolverSetup& s, int sub) {
  const BathModes modes = discretize_bath(s.bath);
  const Mat2 H = s.system.hamiltonian();
  const Mat2& W = s.system.Ws;
  auto memory = [&](const std::vector<Mat2>& g, int k) {
    Mat2 total;
    const double t = k * s.dt;
    if (k == 0) return total;
    const int panels = k * sub;
    const double h = t / panels;
    for (int r = 0; r <= panels; ++r) {
      const double x = r * h;
      const double w = (r == 0 || r == panels) ? 0.5 * h : h;
      const Mat2 f = W * interpolate_bold(g, s.dt, t - x) * W * interpolate_bold(g, s.dt, x);
      total += (-w) * correlation_B(modes, s.bath.beta, x, t) * f;
    }
    return total;
  };
  std::vector<Mat2> g{Mat2::identity()};
  for (int k = 0; k < s.steps; ++k) {
    const Mat2 gk = g.back();
    const Mat2 star = gk + s.dt * (kI * H * gk + memory(g, k));
    g.push_back(star);
    const Mat2 star2 = star + s.dt * (kI * H * star + memory(g, k + 1));
    g.back() = 0.5 * (gk + star2);
  }
  return g;
}

}  // namespace

TEST_CASE("bold interpolation") {
  const std::vector<Mat2> g = {Mat2::identity(), sigma_x(), sigma_z()};
  CHECK(interpolate_bold(g, 0.1, 0.0) == g[0]);
  CHECK(interpolate_bold(g, 0.1, 0.1) == g[1]);
  CHECK(interpolate_bold(g, 0.1, 0.2) == g[2]);
  CHECK(max_abs(interpolate_bold(g, 0.1, 0.05) - 0.5 * (g[0] + g[1])) < 1e-15);
  CHECK(max_abs(interpolate_bold(g, 0.1, 0.175) - (0.25 * g[1] + 0.75 * g[2])) < 1e-14);
  CHECK_THROWS_AS(interpolate_bold(g, 0.1, 0.25), NumericalError);
  CHECK_THROWS_AS(interpolate_bold(g, 0.1, -0.01), NumericalError);
  const BoldTable table(0.1, g);
  CHECK(table.horizon() == doctest::Approx(0.2));
  CHECK(table.interpolate(0.1) == g[1]);
  CHECK_THROWS_AS(BoldTable(0.0, g), std::invalid_argument);
}

TEST_CASE("bold propagator without coupling is the Heun free flow") {
  SolverSetup s = base_setup(0.0, 0.0);
  s.budget.Bbound = 0.0;
  const BoldTable table = solve_bold_propagator(ModelContext(s));
  REQUIRE(table.values().size() == 61);
  CHECK(table[0] == Mat2::identity());
  const Mat2 iH = kI * s.system.hamiltonian();
  Mat2 g = Mat2::identity();
  double err = 0.0;
  for (int k = 1; k <= s.steps; ++k) {
    g = g + s.dt * (iH * g) + (0.5 * s.dt * s.dt) * (iH * (iH * g));
    CHECK(max_abs(table[k] - g) < 1e-13);
    err = std::max(err, max_abs(table[k] - matexp_herm(s.system.hamiltonian(), k * s.dt)));
  }
  CHECK(err < 5e-3);
  // the interpolant tracks the exact flow to second order
  double ierr = 0.0;
  for (int q = 0; q < 200; ++q) {
    const double x = uni(0.0, 3.0);
    ierr = std::max(ierr, max_abs(table.interpolate(x) - matexp_herm(s.system.hamiltonian(), x)));
  }
  CHECK(ierr < 5e-3);
}

TEST_CASE("first-order bold propagator matches a quadrature march") {
  SolverSetup s = base_setup(0.2, 0.0);
  s.b_table = 0;
  s.budget = SampleBudget{1e5, 0.0970823, 1};
  s.steps = 20;
  const auto oracle = bold_first_order_oracle(s, 40);
  const int seeds = 5;
  std::vector<BoldTable> runs;
  for (int q = 0; q < seeds; ++q) {
    s.seed = 70 + q;
    runs.push_back(solve_bold_propagator(ModelContext(s)));
  }
  for (int k : {5, 10, 20}) {
    for (int e = 0; e < 4; ++e) {
      for (int part = 0; part < 2; ++part) {
        auto val = [&](const Mat2& x) { return part ? x.a[e].imag() : x.a[e].real(); };
        double mean = 0.0, sq = 0.0;
        for (const auto& r : runs) mean += val(r[k]) / seeds;
        for (const auto& r : runs) sq += std::pow(val(r[k]) - mean, 2);
        const double se = std::sqrt(sq / (seeds - 1) / seeds);
        CHECK(std::abs(mean - val(oracle[k])) <= 4.0 * se + 1e-4);
      }
    }
  }
}

TEST_CASE("coupled bold propagator decays") {
  SolverSetup s = base_setup(0.2, 0.0);
  s.budget.M0 = 2e4;
  s.budget.Mbar = 3;
  const BoldTable table = solve_bold_propagator(ModelContext(s));
  // ||G G^dagger - I|| grows as the bath damps the one-sided propagator
  double prev = 0.0;
  for (int k = 10; k <= s.steps; k += 10) {
    const double dev = max_abs(table[k] * adjoint(table[k]) - Mat2::identity());
    CHECK(dev > prev);
    prev = dev;
    CHECK(std::abs(trace(table[k] * adjoint(table[k]))) < 2.0);
  }
}

TEST_CASE("btb basis propagator branches") {
  SolverSetup s = base_setup(0.2);
  s.budget.M0 = 2e3;
  const BoldTable table = solve_bold_propagator(ModelContext(s));
  for (int q = 0; q < 200; ++q) {
    const double a = uni(-1.5, 0.0), b = uni(0.0, 1.5);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(max_abs(btb_basis_propagator(table, s.system, i, j, a, b) - basis_propagator(s.system, i, j, a, b)) < 1e-14);
    const double gap = uni(0.0, 1.5), lo = uni(0.0, 1.5);
    CHECK(max_abs(btb_basis_propagator(table, s.system, 0, 0, -lo - gap, -lo) -
                  adjoint(btb_basis_propagator(table, s.system, 0, 0, lo, lo + gap))) < 1e-15);
    CHECK(max_abs(btb_basis_propagator(table, s.system, 0, 1, lo, lo + gap) - table.interpolate(gap)) < 1e-13);
  }
  CHECK_THROWS_AS(btb_basis_propagator(table, s.system, 0, 0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("btb functional: thin crossing and shift identity") {
  SolverSetup s = base_setup(0.2);
  std::vector<Mat2> values;
  for (int k = 0; k <= 80; ++k) values.push_back(random_matrix());
  const BoldTable table(0.05, values);
  // no points: a single thin segment, independent of the table
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(max_abs(btb_system_functional(table, s.system, 1.3, {}, i, j) - basis_propagator(s.system, i, j, -1.3, 1.3)) <
            1e-15);

  const CoeffsB b = coefficients_b(s.system, 0.05);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + trial % 5;
    const int n = 2 + trial % 30;
    const double t = n * 0.05;
    std::vector<double> pts(m);
    for (auto& x : pts) x = uni(-t, t);
    std::sort(pts.begin(), pts.end());
    std::vector<double> moved;
    for (double x : pts) moved.push_back(x < 0.0 ? x - 0.05 : x + 0.05);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Mat2 rhs;
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) rhs += b(i, j, k, l) * btb_system_functional(table, s.system, t, pts, k, l);
        CHECK(max_abs(btb_system_functional(table, s.system, t + 0.05, moved, i, j) - rhs) < 1e-12);
      }
  }
  const std::vector<double> bad = {0.4, -0.4};
  CHECK_THROWS_AS(btb_system_functional(table, s.system, 1.0, bad, 0, 0), std::invalid_argument);
}

TEST_CASE("btb functional without coupling approaches the bare functional") {
  SolverSetup s = base_setup(0.0);
  s.budget.Bbound = 0.0;
  const BoldTable table = solve_bold_propagator(ModelContext(s));
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 4;
    const double t = uni(0.2, 1.5);
    std::vector<double> pts(m);
    for (auto& x : pts) x = uni(-t, t);
    std::sort(pts.begin(), pts.end());
    CHECK(max_abs(btb_system_functional(table, s.system, t, pts, 1, 0) - system_functional(s.system, t, pts, 1, 0)) <
          1e-2);
  }
}

TEST_CASE("btb without coupling is the Heun free march") {
  SolverSetup s = base_setup(0.0);
  s.budget.Bbound = 0.0;
  const Trajectory tr = run_btb(s);
  const Trajectory dy = run_dyson_reuse(s);
  REQUIRE(tr.steps.size() == dy.steps.size());
  for (std::size_t n = 0; n < tr.steps.size(); ++n) CHECK(max_abs(tr.steps[n].G - dy.steps[n].G) < 1e-13);
  CHECK(tr.bold_table.size() == 61);
}

TEST_CASE("btb run bookkeeping, threads and horizon") {
  SolverSetup s = base_setup(0.2);
  s.steps = 20;
  const Trajectory a = run_btb(s);
  CHECK(a.max_hermiticity_defect <= 1e-12);
  CHECK(a.steps.front().G == s.system.Os);
  CHECK(a.bold_samples.size() == 20);
  CHECK(a.orders == std::vector<int>{1, 3});
  s.threads = 3;
  const Trajectory b = run_btb(s);
  for (std::size_t n = 0; n < a.steps.size(); ++n) CHECK(a.steps[n].G == b.steps[n].G);

  const BoldTable short_table(0.05, std::vector<Mat2>(a.bold_table.begin(), a.bold_table.begin() + 11));
  CHECK_THROWS_AS(run_btb_with_table(s, short_table), NumericalError);
  const BoldTable full(0.05, a.bold_table);
  s.threads = 1;
  const Trajectory c = run_btb_with_table(s, full);
  for (std::size_t n = 0; n < a.steps.size(); ++n) CHECK(a.steps[n].G == c.steps[n].G);
}

TEST_CASE("weak coupling: btb and dyson reuse agree statistically") {
  SolverSetup s = base_setup(0.2);
  s.steps = 20;
  s.budget.M0 = 2e4;
  s.budget.Mbar = 5;
  const int seeds = 6;
  std::vector<double> d, b;
  for (int q = 0; q < seeds; ++q) {
    s.seed = 300 + q;
    d.push_back(run_dyson_reuse(s).steps.back().obs);
    b.push_back(run_btb(s).steps.back().obs);
  }
  auto stats = [&](const std::vector<double>& v) {
    double m = 0.0, sq = 0.0;
    for (double x : v) m += x / v.size();
    for (double x : v) sq += (x - m) * (x - m);
    return std::pair<double, double>{m, sq / (v.size() - 1) / v.size()};
  };
  const auto [md, vd] = stats(d);
  const auto [mb, vb] = stats(b);
  CHECK(std::abs(md - mb) <= 3.0 * std::sqrt(vd + vb));
}
