#include "openqmc/dyson.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "estimators.hpp"
#include "openqmc/errors.hpp"

namespace openqmc {

using detail::Acc16;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<int> odd_orders(int mbar) {
  std::vector<int> v;
  for (int m = 1; m <= mbar; m += 2) v.push_back(m);
  return v;
}

void require_odd(const SolverSetup& setup) {
  if (setup.budget.Mbar % 2 == 0) throw std::invalid_argument("Mbar must be odd for this method");
}

// First-order L, R factors of U(-t, s, t). `negative` selects the branch, so s = 0
// with negative = true gives the limit from below.
void split_first_order(const SystemKernel& kernel, double t, double s, bool negative, Mat2& L, Mat2& R) {
  const Mat2& W = kernel.spec().Ws;
  if (negative) {
    L = kernel.flow(t);
    R = kernel.flow(s) * W * kernel.flow(-t - s);
  } else {
    L = kernel.flow(t - s) * W * kernel.flow(s);
    R = kernel.flow(-t);
  }
}

// Composite trapezoid of i^2 (-1)^{[s<0]} U_ij(-t, s, t) B(s, t) over s = -r h (negative
// branch) or s = r h, r = 0..panels_total.
void trapezoid_branch(const ModelContext& ctx, double t, int panels_total, double h, bool negative, Acc16& acc) {
  for (int r = 0; r <= panels_total; ++r) {
    const double s = negative ? -r * h : r * h;
    const double w = (r == 0 || r == panels_total) ? 0.5 * h : h;
    Mat2 L, R;
    split_first_order(ctx.kernel, t, s, negative, L, R);
    const cplx bst = ctx.corr.at(std::abs(s) - t);
    // i^2 (-1)^{#neg}
    acc.add(w * (negative ? 1.0 : -1.0) * bst, L, R);
  }
}

void track_hermiticity(Trajectory& traj, const Mat2& G, int n) {
  const double d = hermiticity_defect(G);
  traj.max_hermiticity_defect = std::max(traj.max_hermiticity_defect, d);
  if (!(d <= 1e-12))
    throw NumericalError("Hermiticity lost at step " + std::to_string(n) + " (defect " + std::to_string(d) + ")");
}

StepRecord make_record(const ModelContext& ctx, int n, const Mat2& G, std::vector<std::int64_t> samples) {
  StepRecord r;
  r.n = n;
  r.t = ctx.t(n);
  r.G = G;
  r.obs = expected_observable(G, ctx.setup.system.rho_s);
  r.samples = std::move(samples);
  return r;
}

}  // namespace

int quadrature_panels(const SolverSetup& setup, int quadrature_points) {
  if (quadrature_points < 2) throw std::invalid_argument("quadrature_points must be at least 2");
  return std::max(1, static_cast<int>(std::lround(quadrature_points / (2.0 * setup.steps))));
}

Mat2 heun_step(const Mat2& Gn, const Mat2& Kn, const Mat2& Kn1, double dt, const SystemSpec& spec) {
  const Mat2 H = spec.hamiltonian();
  const Mat2& W = spec.Ws;
  auto drift = [&](const Mat2& G, const Mat2& K) {
    const Mat2 wk = W * K;
    return kI * commutator(H, G) + wk + adjoint(wk);
  };
  const Mat2 g1 = Gn + dt * drift(Gn, Kn);
  const Mat2 g2 = g1 + dt * drift(g1, Kn1);
  return 0.5 * (Gn + g2);
}

MatGrid recurrence_update(const MatGrid& K, const CoeffsB& b, const MatGrid& D) {
  MatGrid out = D;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out[i][j] += b(i, j, k, l) * K[k][l];
  return out;
}

MatGrid estimate_D_shell(const ModelContext& ctx, int n, std::vector<std::int64_t>* counts) {
  MatGrid D{};
  for (int m = 1; m <= ctx.setup.budget.Mbar; m += 2) {
    const auto c = sample_count(CountKind::Shell, n, m, ctx.setup.dt, ctx.setup.budget);
    if (counts) counts->push_back(c);
    if (c == 0) continue;
    detail::add_grid(D, detail::shell_order(ctx, n, m, c, StreamTag::DysonShell, PairingKind::All,
                                            [&](double t, const double* pts, int mm, Mat2& L, Mat2& R) {
                                              ctx.kernel.split_bare(t, pts, mm, L, R);
                                            }));
  }
  return D;
}

Mat2 estimate_K_full(const ModelContext& ctx, int n, std::vector<std::int64_t>* counts) {
  Mat2 K;
  const double t = ctx.t(n);
  const Mat2& O = ctx.setup.system.Os;
  for (int m = 1; m <= ctx.setup.budget.Mbar; m += 2) {
    const auto c = sample_count(CountKind::DysonFull, n, m, ctx.setup.dt, ctx.setup.budget);
    if (counts) counts->push_back(c);
    if (c == 0) continue;
    const PairingSet& table = pairing_table({PairingKind::All, m + 1, 1});
    const double phase = detail::even_power_of_i(m + 1);
    Mat2 sum = blocked_reduce<Mat2>(c, ctx.setup.threads, [&](std::int64_t k, Mat2& acc) {
      RngStream rng(ctx.setup.seed, StreamTag::DysonFull, static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m),
                    static_cast<std::uint64_t>(k));
      double pts[kMaxPoints];
      cplx pair[kMaxPoints * kMaxPoints];
      sample_simplex(m, -t, t, rng, pts);
      pts[m] = t;
      const int neg = detail::count_negative(pts, m);
      ctx.corr.pairwise(pts, m + 1, pair);
      const cplx lb = table.sum_products(pair);
      Mat2 L, R;
      ctx.kernel.split_bare(t, pts, m, L, R);
      acc += (lb * (neg % 2 == 0 ? phase : -phase)) * (L * O * R);
    });
    K += (simplex_volume(m, 2.0 * t) / static_cast<double>(c)) * sum;
  }
  return K;
}

Mat2 bare_dqmc_at(const ModelContext& ctx, double t, int mbar, std::vector<std::int64_t>* counts,
                  std::uint32_t stream_step) {
  if (t < 0.0) throw std::invalid_argument("bare_dqmc_at: t must be nonnegative");
  if (mbar < 0 || mbar % 2 != 0) throw std::invalid_argument("bare_dqmc_at: Mbar must be even");
  const Mat2& O = ctx.setup.system.Os;
  Mat2 G = ctx.kernel.flow(t) * O * ctx.kernel.flow(-t);
  for (int m = 2; m <= mbar; m += 2) {
    const auto c = t > 0.0 ? bare_sample_count(m, t, ctx.setup.budget) : 0;
    if (counts) counts->push_back(c);
    if (c == 0) continue;
    const PairingSet& table = pairing_table({PairingKind::All, m, 1});
    const double phase = detail::even_power_of_i(m);
    Mat2 sum = blocked_reduce<Mat2>(c, ctx.setup.threads, [&](std::int64_t k, Mat2& acc) {
      RngStream rng(ctx.setup.seed, StreamTag::BareDqmc, stream_step, static_cast<std::uint32_t>(m),
                    static_cast<std::uint64_t>(k));
      double pts[kMaxPoints];
      cplx pair[kMaxPoints * kMaxPoints];
      sample_simplex(m, -t, t, rng, pts);
      const int neg = detail::count_negative(pts, m);
      ctx.corr.pairwise(pts, m, pair);
      const cplx lb = table.sum_products(pair);
      Mat2 L, R;
      ctx.kernel.split_bare(t, pts, m, L, R);
      acc += (lb * (neg % 2 == 0 ? phase : -phase)) * (L * O * R);
    });
    G += (simplex_volume(m, 2.0 * t) / static_cast<double>(c)) * sum;
  }
  return G;
}

QuadratureK k1_quadrature(const ModelContext& ctx, int n, int panels) {
  if (panels < 1) throw std::invalid_argument("k1_quadrature: panels must be positive");
  QuadratureK out;
  if (n == 0) return out;
  const double t = ctx.t(n);
  const double h = ctx.setup.dt / panels;
  Acc16 acc;
  trapezoid_branch(ctx, t, n * panels, h, true, acc);
  trapezoid_branch(ctx, t, n * panels, h, false, acc);
  out.Kij = acc.grid(1.0);
  out.K = contract(ctx.a, out.Kij);
  return out;
}

MatGrid k1_quadrature_shell(const ModelContext& ctx, int n, int panels) {
  if (panels < 1) throw std::invalid_argument("k1_quadrature_shell: panels must be positive");
  const double t1 = ctx.t(n + 1);
  const double h = ctx.setup.dt / panels;
  Acc16 acc;
  trapezoid_branch(ctx, t1, panels, h, true, acc);
  trapezoid_branch(ctx, t1, panels, h, false, acc);
  return acc.grid(1.0);
}

Trajectory run_dyson_direct(const SolverSetup& setup, const DysonOptions& options) {
  const auto start = Clock::now();
  require_odd(setup);
  const bool quad = options.estimator == Estimator::Quadrature;
  if (quad && setup.budget.Mbar != 1) throw std::invalid_argument("quadrature estimator requires Mbar = 1");
  ModelContext ctx(setup);
  const int panels = quad ? quadrature_panels(setup, options.quadrature_points) : 0;
  Trajectory traj;
  traj.method = "dyson-direct";
  traj.orders = odd_orders(setup.budget.Mbar);
  Mat2 G = setup.system.Os;
  Mat2 Kn;
  traj.steps.push_back(make_record(ctx, 0, G, std::vector<std::int64_t>(traj.orders.size(), 0)));
  for (int n = 0; n < setup.steps; ++n) {
    std::vector<std::int64_t> counts;
    const Mat2 Kn1 = quad ? k1_quadrature(ctx, n + 1, panels).K : estimate_K_full(ctx, n + 1, &counts);
    if (quad) counts.assign(traj.orders.size(), 0);
    G = heun_step(G, Kn, Kn1, setup.dt, setup.system);
    track_hermiticity(traj, G, n + 1);
    traj.steps.push_back(make_record(ctx, n + 1, G, std::move(counts)));
    Kn = Kn1;
  }
  traj.wall_seconds = {{"march", seconds_since(start)}, {"total", seconds_since(start)}};
  return traj;
}

Trajectory run_dyson_reuse(const SolverSetup& setup, const DysonOptions& options) {
  const auto start = Clock::now();
  require_odd(setup);
  const bool quad = options.estimator == Estimator::Quadrature;
  if (quad && setup.budget.Mbar != 1) throw std::invalid_argument("quadrature estimator requires Mbar = 1");
  ModelContext ctx(setup);
  const int panels = quad ? quadrature_panels(setup, options.quadrature_points) : 0;
  Trajectory traj;
  traj.method = "dyson-reuse";
  traj.orders = odd_orders(setup.budget.Mbar);
  Mat2 G = setup.system.Os;
  Mat2 Kn;
  MatGrid Kij{};
  traj.steps.push_back(make_record(ctx, 0, G, std::vector<std::int64_t>(traj.orders.size(), 0)));
  for (int n = 0; n < setup.steps; ++n) {
    std::vector<std::int64_t> counts;
    const MatGrid D = quad ? k1_quadrature_shell(ctx, n, panels) : estimate_D_shell(ctx, n, &counts);
    if (quad) counts.assign(traj.orders.size(), 0);
    Kij = recurrence_update(Kij, ctx.b, D);
    const Mat2 Kn1 = contract(ctx.a, Kij);
    G = heun_step(G, Kn, Kn1, setup.dt, setup.system);
    track_hermiticity(traj, G, n + 1);
    traj.steps.push_back(make_record(ctx, n + 1, G, std::move(counts)));
    Kn = Kn1;
  }
  traj.wall_seconds = {{"march", seconds_since(start)}, {"total", seconds_since(start)}};
  return traj;
}

Trajectory run_bare_dqmc(const SolverSetup& setup) {
  const auto start = Clock::now();
  if (setup.budget.Mbar % 2 != 0) throw std::invalid_argument("Mbar must be even for bare dQMC");
  ModelContext ctx(setup);
  Trajectory traj;
  traj.method = "bare-dqmc";
  for (int m = 2; m <= setup.budget.Mbar; m += 2) traj.orders.push_back(m);
  for (int n = 0; n <= setup.steps; ++n) {
    std::vector<std::int64_t> counts;
    const Mat2 raw = bare_dqmc_at(ctx, ctx.t(n), setup.budget.Mbar, &counts, static_cast<std::uint32_t>(n));
    // The bare estimate is Hermitian only in expectation; keep its Hermitian part.
    const Mat2 G = 0.5 * (raw + adjoint(raw));
    traj.max_hermiticity_defect = std::max(traj.max_hermiticity_defect, hermiticity_defect(G));
    StepRecord r;
    r.n = n;
    r.t = ctx.t(n);
    r.G = G;
    r.obs = expected_observable(G, setup.system.rho_s);
    r.samples = std::move(counts);
    traj.steps.push_back(std::move(r));
  }
  traj.wall_seconds = {{"march", seconds_since(start)}, {"total", seconds_since(start)}};
  return traj;
}

}  // namespace openqmc
