#pragma once

#include <span>
#include <vector>

#include "openqmc/mat2.hpp"

namespace openqmc {

struct SystemSpec {
  double epsilon = 0.0;
  double delta = 1.0;
  Mat2 Os = sigma_z();
  Mat2 Ws = sigma_z();
  Mat2 rho_s = outer(1, 1);

  // epsilon * sigma_z + delta * sigma_x
  Mat2 hamiltonian() const;
  void validate() const;
};

// e^{i theta H} for Hermitian H.
Mat2 matexp_herm(const Mat2& H, double theta);

// e^{i theta H} for a fixed Hermitian H with the eigen-split done once.
class HermitianFlow {
 public:
  HermitianFlow() = default;
  explicit HermitianFlow(const Mat2& H);
  Mat2 operator()(double theta) const;

 private:
  double alpha_ = 0.0;
  double r_ = 0.0;
  Mat2 k_;
};

Mat2 bare_propagator(const SystemSpec& spec, double s_i, double s_f);

// States are basis indices: 0 for |-1>, 1 for |1>.
Mat2 basis_propagator(const SystemSpec& spec, int i, int j, double s_i, double s_f);

// G(s_m, t) W G(s_{m-1}, s_m) ... W G(-t, s_1).
Mat2 system_functional(const SystemSpec& spec, double t, std::span<const double> points);
Mat2 system_functional(const SystemSpec& spec, double t, std::span<const double> points, int i, int j);

// a[i][j] = <i|O|j>.
using CoeffsA = std::array<std::array<cplx, 2>, 2>;

// b(i, j, k, l) = <k|e^{i dt H}|i><j|e^{-i dt H}|l>.
struct CoeffsB {
  std::array<cplx, 16> v{};
  cplx& operator()(int i, int j, int k, int l) { return v[((i * 2 + j) * 2 + k) * 2 + l]; }
  cplx operator()(int i, int j, int k, int l) const { return v[((i * 2 + j) * 2 + k) * 2 + l]; }
};

CoeffsA coefficients_a(const SystemSpec& spec);
CoeffsB coefficients_b(const SystemSpec& spec, double dt);

// Sum_ij a_ij K[i][j].
Mat2 contract(const CoeffsA& a, const MatGrid& K);

// Precomputed system pieces for per-sample evaluation.
class SystemKernel {
 public:
  SystemKernel() = default;
  explicit SystemKernel(const SystemSpec& spec);

  const SystemSpec& spec() const { return spec_; }
  const Mat2& hamiltonian() const { return h_; }
  Mat2 flow(double theta) const { return flow_(theta); }

  // Bare segment for an interval that does not cross zero.
  Mat2 segment(double s_i, double s_f) const { return s_f < 0.0 ? flow_(s_i - s_f) : flow_(s_f - s_i); }

  // Splits U(-t, s, t) around its zero-crossing segment: U_ij = L |i><j| R and U = L O R.
  // `seg(s_i, s_f)` supplies the non-crossing segments.
  template <class Segment>
  void split(double t, const double* pts, int m, Segment&& seg, Mat2& L, Mat2& R) const;

  void split_bare(double t, const double* pts, int m, Mat2& L, Mat2& R) const {
    split(t, pts, m, [this](double a, double b) { return segment(a, b); }, L, R);
  }

 private:
  SystemSpec spec_;
  Mat2 h_;
  HermitianFlow flow_;
};

template <class Segment>
void SystemKernel::split(double t, const double* pts, int m, Segment&& seg, Mat2& L, Mat2& R) const {
  // nodes: x_0 = -t, x_1..x_m = pts, x_{m+1} = t; crossing segment c has x_c < 0 <= x_{c+1}
  auto node = [&](int k) { return k == 0 ? -t : (k == m + 1 ? t : pts[k - 1]); };
  int c = 0;
  while (c + 1 <= m && pts[c] < 0.0) ++c;
  const Mat2& W = spec_.Ws;
  R = flow_(node(c));
  for (int k = c - 1; k >= 0; --k) R = R * W * seg(node(k), node(k + 1));
  L = flow_(node(c + 1));
  for (int k = c + 1; k <= m; ++k) L = seg(node(k), node(k + 1)) * W * L;
}

}  // namespace openqmc
