#include "openqmc/btb.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "estimators.hpp"
#include "openqmc/dyson.hpp"
#include "openqmc/errors.hpp"

namespace openqmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Bold segment of a non-crossing interval.
Mat2 bold_segment(std::span<const Mat2> g, double dt, double s_i, double s_f) {
  const Mat2 v = interpolate_bold(g, dt, s_f - s_i);
  return s_f < 0.0 ? adjoint(v) : v;
}

// Memory estimate that is affine in the last table entry: fixed + sum w X g Y.
struct AffineMemory {
  Mat2 fixed;
  std::array<cplx, 16> sandwich{};  // [(r, c) * 4 + (a, b)] = sum w X(r, a) Y(b, c)

  AffineMemory& operator+=(const AffineMemory& o) {
    fixed += o.fixed;
    for (int q = 0; q < 16; ++q) sandwich[q] += o.sandwich[q];
    return *this;
  }

  Mat2 at(const Mat2& last) const {
    Mat2 out = fixed;
    for (int rc = 0; rc < 4; ++rc)
      for (int ab = 0; ab < 4; ++ab) out.a[rc] += sandwich[rc * 4 + ab] * last.a[ab];
    return out;
  }
};

// Sum over odd m of t^m / m! / N * sum_k i^{m+1} U(0, s, t) Lc(s, t) with
// U(0, s, t) = W G(t - s_m) W ... W G(s_2 - s_1) W G(s_1).
// With `affine` the entry g[k] stays symbolic; for k >= 2 at most one gap reaches past t_{k-1}.
AffineMemory bold_memory(const ModelContext& ctx, std::span<const Mat2> g, int k, bool affine, StreamTag tag,
                         std::vector<std::int64_t>* counts) {
  AffineMemory total;
  const double dt = ctx.setup.dt;
  const double t = ctx.t(k);
  const double last_panel = ctx.t(k - 1);
  const Mat2& W = ctx.setup.system.Ws;
  for (int m = 1; m <= ctx.setup.budget.Mbar; m += 2) {
    const auto c = sample_count(CountKind::Inchworm, k, m, dt, ctx.setup.budget);
    if (counts) counts->push_back(c);
    if (c == 0) continue;
    const PairingSet& table = pairing_table({PairingKind::Connected, m + 1, 1});
    const double phase = detail::even_power_of_i(m + 1);
    AffineMemory sum = blocked_reduce<AffineMemory>(c, ctx.setup.threads, [&](std::int64_t q, AffineMemory& acc) {
      RngStream rng(ctx.setup.seed, tag, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(m),
                    static_cast<std::uint64_t>(q));
      double pts[kMaxPoints];
      cplx pair[kMaxPoints * kMaxPoints];
      sample_simplex(m, 0.0, t, rng, pts);
      pts[m] = t;
      ctx.corr.pairwise(pts, m + 1, pair);
      const cplx w = phase * table.sum_products(pair);
      auto gap = [&](int a) { return a == 0 ? pts[0] : pts[a] - pts[a - 1]; };
      int split = -1;
      if (affine)
        for (int a = 0; a <= m; ++a)
          if (gap(a) > last_panel) split = a;
      if (split < 0) {
        Mat2 u = interpolate_bold(g, dt, gap(0));
        for (int a = 1; a <= m; ++a) u = interpolate_bold(g, dt, gap(a)) * W * u;
        acc.fixed += w * (W * u);
        return;
      }
      Mat2 Y = Mat2::identity();
      for (int a = 0; a < split; ++a) Y = W * interpolate_bold(g, dt, gap(a)) * Y;
      Mat2 X = W;
      for (int a = m; a > split; --a) X = X * interpolate_bold(g, dt, gap(a)) * W;
      const double f = std::min(gap(split) / dt - (k - 1), 1.0);
      acc.fixed += (w * (1.0 - f)) * (X * g[k - 1] * Y);
      const cplx wf = w * f;
      for (int r = 0; r < 2; ++r)
        for (int cc = 0; cc < 2; ++cc)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) acc.sandwich[(r * 2 + cc) * 4 + a * 2 + b] += wf * X(r, a) * Y(b, cc);
    });
    const double scale = simplex_volume(m, t) / static_cast<double>(c);
    total.fixed += scale * sum.fixed;
    for (int q = 0; q < 16; ++q) total.sandwich[q] += scale * sum.sandwich[q];
  }
  return total;
}

}  // namespace

Mat2 interpolate_bold(std::span<const Mat2> g, double dt, double s) {
  if (g.empty()) throw std::invalid_argument("interpolate_bold: empty table");
  const double last = static_cast<double>(g.size() - 1);
  double u = s / dt;
  if (!(u >= 0.0) || u > last * (1.0 + 1e-12) + 1e-12)
    throw NumericalError("bold table horizon exceeded: gap " + std::to_string(s) + " beyond " +
                         std::to_string(last * dt));
  u = std::min(u, last);
  auto k = static_cast<std::size_t>(u);
  if (k + 1 >= g.size()) return g.back();
  const double f = u - static_cast<double>(k);
  if (f == 0.0) return g[k];
  return (1.0 - f) * g[k] + f * g[k + 1];
}

BoldTable::BoldTable(double dt, std::vector<Mat2> values) : dt_(dt), g_(std::move(values)) {
  if (!(dt > 0.0)) throw std::invalid_argument("BoldTable: dt must be positive");
  if (g_.empty()) throw std::invalid_argument("BoldTable: needs at least one entry");
}

BoldTable solve_bold_propagator(const ModelContext& ctx, std::vector<std::vector<std::int64_t>>* counts) {
  const double dt = ctx.setup.dt;
  const Mat2 iH = kI * ctx.kernel.hamiltonian();
  std::vector<Mat2> g{Mat2::identity()};
  g.reserve(static_cast<std::size_t>(ctx.setup.steps) + 1);
  if (counts) counts->clear();
  // the stage-2 draws at t_{k+1} also serve stage 1 of the next step
  AffineMemory carried;
  bool have_carried = false;
  for (int k = 0; k < ctx.setup.steps; ++k) {
    std::vector<std::int64_t> c1, c2;
    const Mat2 gk = g.back();
    const Mat2 mem1 = have_carried ? carried.at(gk) : bold_memory(ctx, g, k, false, StreamTag::BoldStage1, &c1).fixed;
    const Mat2 star = gk + dt * (iH * gk + mem1);
    g.push_back(star);  // last panel interpolates towards the predictor
    const bool affine = k + 1 >= 2;
    carried = bold_memory(ctx, g, k + 1, affine, StreamTag::BoldStage2, &c2);
    have_carried = affine;
    const Mat2 star2 = star + dt * (iH * star + carried.at(star));
    g.back() = 0.5 * (gk + star2);
    if (counts) {
      if (c1.empty()) c1.assign(c2.size(), 0);
      for (std::size_t q = 0; q < c2.size(); ++q) c1[q] += c2[q];
      counts->push_back(std::move(c1));
    }
  }
  return BoldTable(dt, std::move(g));
}

Mat2 btb_basis_propagator(const BoldTable& table, const SystemSpec& spec, int i, int j, double s_i, double s_f) {
  if (s_i > s_f) throw std::invalid_argument("btb_basis_propagator: requires s_i <= s_f");
  if (s_i < 0.0 && s_f >= 0.0) {
    const HermitianFlow f(spec.hamiltonian());
    return f(s_f) * outer(i, j) * f(s_i);
  }
  return bold_segment(table.values(), table.dt(), s_i, s_f);
}

Mat2 btb_system_functional(const BoldTable& table, const SystemSpec& spec, double t, std::span<const double> points,
                           int i, int j) {
  if (!std::is_sorted(points.begin(), points.end()))
    throw std::invalid_argument("btb_system_functional: points must be sorted ascending");
  if (!points.empty() && (points.front() < -t || points.back() > t))
    throw std::invalid_argument("btb_system_functional: points must lie in [-t, t]");
  Mat2 u = btb_basis_propagator(table, spec, i, j, -t, points.empty() ? t : points.front());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double next = k + 1 < points.size() ? points[k + 1] : t;
    u = btb_basis_propagator(table, spec, i, j, points[k], next) * spec.Ws * u;
  }
  return u;
}

MatGrid estimate_D_shell_btb(const ModelContext& ctx, const BoldTable& table, int n,
                             std::vector<std::int64_t>* counts) {
  if (ctx.t(n + 1) > table.horizon() * (1.0 + 1e-12))
    throw NumericalError("bold table horizon shorter than the march");
  MatGrid D{};
  const std::span<const Mat2> g(table.values());
  const double dt = table.dt();
  for (int m = 1; m <= ctx.setup.budget.Mbar; m += 2) {
    const auto c = sample_count(CountKind::Shell, n, m, ctx.setup.dt, ctx.setup.budget);
    if (counts) counts->push_back(c);
    if (c == 0) continue;
    detail::add_grid(D, detail::shell_order(ctx, n, m, c, StreamTag::BtbShell, PairingKind::BTB,
                                            [&](double t, const double* pts, int mm, Mat2& L, Mat2& R) {
                                              ctx.kernel.split(
                                                  t, pts, mm,
                                                  [&](double a, double b) { return bold_segment(g, dt, a, b); }, L,
                                                  R);
                                            }));
  }
  return D;
}

namespace {

Trajectory btb_march(const ModelContext& ctx, const BoldTable& table, Trajectory traj) {
  const SolverSetup& setup = ctx.setup;
  Mat2 G = setup.system.Os;
  Mat2 Kn;
  MatGrid Kij{};
  StepRecord first;
  first.G = G;
  first.obs = expected_observable(G, setup.system.rho_s);
  first.samples.assign(traj.orders.size(), 0);
  traj.steps.push_back(first);
  for (int n = 0; n < setup.steps; ++n) {
    std::vector<std::int64_t> counts;
    const MatGrid D = estimate_D_shell_btb(ctx, table, n, &counts);
    Kij = recurrence_update(Kij, ctx.b, D);
    const Mat2 Kn1 = contract(ctx.a, Kij);
    G = heun_step(G, Kn, Kn1, setup.dt, setup.system);
    const double d = hermiticity_defect(G);
    traj.max_hermiticity_defect = std::max(traj.max_hermiticity_defect, d);
    if (!(d <= 1e-12)) throw NumericalError("Hermiticity lost at step " + std::to_string(n + 1));
    StepRecord r;
    r.n = n + 1;
    r.t = ctx.t(n + 1);
    r.G = G;
    r.obs = expected_observable(G, setup.system.rho_s);
    r.samples = std::move(counts);
    traj.steps.push_back(std::move(r));
    Kn = Kn1;
  }
  return traj;
}

Trajectory btb_prepare(const SolverSetup& setup) {
  if (setup.budget.Mbar % 2 == 0) throw std::invalid_argument("Mbar must be odd for this method");
  Trajectory traj;
  traj.method = "btb";
  for (int m = 1; m <= setup.budget.Mbar; m += 2) traj.orders.push_back(m);
  return traj;
}

}  // namespace

Trajectory run_btb(const SolverSetup& setup) {
  const auto start = Clock::now();
  Trajectory traj = btb_prepare(setup);
  ModelContext ctx(setup);
  const BoldTable table = solve_bold_propagator(ctx, &traj.bold_samples);
  const double bold = seconds_since(start);
  const auto march_start = Clock::now();
  traj = btb_march(ctx, table, std::move(traj));
  traj.bold_table = table.values();
  traj.wall_seconds = {{"bold", bold}, {"march", seconds_since(march_start)}, {"total", seconds_since(start)}};
  return traj;
}

Trajectory run_btb_with_table(const SolverSetup& setup, const BoldTable& table) {
  const auto start = Clock::now();
  Trajectory traj = btb_prepare(setup);
  ModelContext ctx(setup);
  traj = btb_march(ctx, table, std::move(traj));
  traj.wall_seconds = {{"march", seconds_since(start)}, {"total", seconds_since(start)}};
  return traj;
}

}  // namespace openqmc
