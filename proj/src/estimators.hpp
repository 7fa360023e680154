#pragma once

#include <algorithm>
#include <array>
#include <cstdint>

#include "openqmc/pairings.hpp"
#include "openqmc/parallel.hpp"
#include "openqmc/rng.hpp"
#include "openqmc/sampling.hpp"
#include "openqmc/trajectory.hpp"

namespace openqmc::detail {

// Sum over samples of w * L|i><j|R, laid out [(i, j)][(k, l)].
struct Acc16 {
  std::array<cplx, 16> v{};

  Acc16& operator+=(const Acc16& o) {
    for (int q = 0; q < 16; ++q) v[q] += o.v[q];
    return *this;
  }

  void add(cplx w, const Mat2& L, const Mat2& R) {
    for (int i = 0; i < 2; ++i) {
      const cplx l0 = w * L(0, i), l1 = w * L(1, i);
      for (int j = 0; j < 2; ++j) {
        cplx* q = &v[(i * 2 + j) * 4];
        q[0] += l0 * R(j, 0);
        q[1] += l0 * R(j, 1);
        q[2] += l1 * R(j, 0);
        q[3] += l1 * R(j, 1);
      }
    }
  }

  MatGrid grid(double scale) const {
    MatGrid g{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int q = 0; q < 4; ++q) g[i][j].a[q] = scale * v[(i * 2 + j) * 4 + q];
    return g;
  }
};

inline void add_grid(MatGrid& acc, const MatGrid& x) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) acc[i][j] += x[i][j];
}

// i^p for even p.
inline double even_power_of_i(int p) { return (p / 2) % 2 == 0 ? 1.0 : -1.0; }

inline int count_negative(const double* pts, int m) {
  return static_cast<int>(std::count_if(pts, pts + m, [](double s) { return s < 0.0; }));
}

// One odd order of a shell estimate for the step n -> n+1: the sample mean of
// |T| i^{m+1} (-1)^{#neg} U_ij(-t, s, t) L(s, t) with t = t_{n+1}.
template <class Split>
MatGrid shell_order(const ModelContext& ctx, int n, int m, std::int64_t count, StreamTag tag, PairingKind kind,
                    Split&& split) {
  const double dt = ctx.setup.dt;
  const double t_prev = ctx.t(n), t1 = ctx.t(n + 1);
  const int pts_n = m + 1;
  std::array<const PairingSet*, kMaxPoints + 1> tables{};
  for (int ell = 1; ell <= pts_n; ++ell)
    tables[ell] = &pairing_table({kind, pts_n, kind == PairingKind::BTB ? ell : 1});
  const double phase = even_power_of_i(m + 1);
  const auto seed = ctx.setup.seed;
  Acc16 sum = blocked_reduce<Acc16>(count, ctx.setup.threads, [&](std::int64_t k, Acc16& acc) {
    RngStream rng(seed, tag, static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m), static_cast<std::uint64_t>(k));
    double pts[kMaxPoints];
    cplx pair[kMaxPoints * kMaxPoints];
    sample_shell(m, t_prev, dt, rng, pts);
    pts[m] = t1;
    const int neg = count_negative(pts, m);
    ctx.corr.pairwise(pts, pts_n, pair);
    const cplx lb = tables[kind == PairingKind::BTB ? 1 + neg : 1]->sum_products(pair);
    Mat2 L, R;
    split(t1, pts, m, L, R);
    acc.add(lb * (neg % 2 == 0 ? phase : -phase), L, R);
  });
  return sum.grid(shell_volume(m, n, dt) / static_cast<double>(count));
}

}  // namespace openqmc::detail
