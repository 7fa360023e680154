#include "openqmc/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace openqmc {

namespace {

void require_sorted(double t, std::span<const double> points) {
  if (!std::is_sorted(points.begin(), points.end()))
    throw std::invalid_argument("system_functional: points must be sorted ascending");
  if (!points.empty() && (points.front() < -t || points.back() > t))
    throw std::invalid_argument("system_functional: points must lie in [-t, t]");
}

}  // namespace

Mat2 SystemSpec::hamiltonian() const { return epsilon * sigma_z() + delta * sigma_x(); }

void SystemSpec::validate() const {
  if (!std::isfinite(epsilon) || !std::isfinite(delta)) throw std::invalid_argument("system: epsilon and delta must be finite");
  if (!is_hermitian(Os)) throw std::invalid_argument("system: observable must be Hermitian");
  if (!is_hermitian(Ws)) throw std::invalid_argument("system: coupling operator must be Hermitian");
  if (!is_hermitian(rho_s)) throw std::invalid_argument("system: rho_s must be Hermitian");
  if (std::abs(trace(rho_s) - 1.0) > 1e-12) throw std::invalid_argument("system: rho_s must have unit trace");
  // 2x2 Hermitian with unit trace is PSD iff det >= 0
  const double det = (rho_s(0, 0) * rho_s(1, 1) - rho_s(0, 1) * rho_s(1, 0)).real();
  if (det < -1e-12 || rho_s(0, 0).real() < -1e-12 || rho_s(1, 1).real() < -1e-12)
    throw std::invalid_argument("system: rho_s must be positive semidefinite");
}

HermitianFlow::HermitianFlow(const Mat2& H) {
  if (!is_hermitian(H, 1e-12)) throw std::invalid_argument("matexp_herm: matrix must be Hermitian");
  const double a = H(0, 0).real(), d = H(1, 1).real();
  alpha_ = 0.5 * (a + d);
  k_ = H - alpha_ * Mat2::identity();
  const double h = 0.5 * (a - d);
  r_ = std::sqrt(h * h + std::norm(H(0, 1)));
}

Mat2 HermitianFlow::operator()(double theta) const {
  const double x = theta * r_;
  const double c = std::cos(x);
  const double s = r_ > 0.0 ? std::sin(x) / r_ : theta;
  Mat2 out = Mat2::from(c, 0.0, 0.0, c) + k_ * cplx{0.0, s};
  if (alpha_ != 0.0) out *= std::polar(1.0, theta * alpha_);
  return out;
}

Mat2 matexp_herm(const Mat2& H, double theta) { return HermitianFlow(H)(theta); }

Mat2 bare_propagator(const SystemSpec& spec, double s_i, double s_f) {
  if (s_i > s_f) throw std::invalid_argument("bare_propagator: requires s_i <= s_f");
  HermitianFlow f(spec.hamiltonian());
  if (s_f < 0.0) return f(s_i - s_f);
  if (s_i >= 0.0) return f(s_f - s_i);
  return f(s_f) * spec.Os * f(s_i);
}

Mat2 basis_propagator(const SystemSpec& spec, int i, int j, double s_i, double s_f) {
  if (s_i > s_f) throw std::invalid_argument("basis_propagator: requires s_i <= s_f");
  if (s_f < 0.0 || s_i >= 0.0) return bare_propagator(spec, s_i, s_f);
  HermitianFlow f(spec.hamiltonian());
  return f(s_f) * outer(i, j) * f(s_i);
}

Mat2 system_functional(const SystemSpec& spec, double t, std::span<const double> points) {
  require_sorted(t, points);
  Mat2 u = bare_propagator(spec, -t, points.empty() ? t : points.front());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double next = k + 1 < points.size() ? points[k + 1] : t;
    u = bare_propagator(spec, points[k], next) * spec.Ws * u;
  }
  return u;
}

Mat2 system_functional(const SystemSpec& spec, double t, std::span<const double> points, int i, int j) {
  require_sorted(t, points);
  Mat2 u = basis_propagator(spec, i, j, -t, points.empty() ? t : points.front());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double next = k + 1 < points.size() ? points[k + 1] : t;
    u = basis_propagator(spec, i, j, points[k], next) * spec.Ws * u;
  }
  return u;
}

CoeffsA coefficients_a(const SystemSpec& spec) {
  CoeffsA a{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a[i][j] = spec.Os(i, j);
  return a;
}

CoeffsB coefficients_b(const SystemSpec& spec, double dt) {
  if (dt < 0.0) throw std::invalid_argument("coefficients_b: dt must be nonnegative");
  const Mat2 u = matexp_herm(spec.hamiltonian(), dt);
  CoeffsB b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) b(i, j, k, l) = u(k, i) * std::conj(u(l, j));
  return b;
}

Mat2 contract(const CoeffsA& a, const MatGrid& K) {
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (a[i][j] != cplx{}) out += a[i][j] * K[i][j];
  return out;
}

SystemKernel::SystemKernel(const SystemSpec& spec) : spec_(spec), h_(spec.hamiltonian()), flow_(h_) {}

}  // namespace openqmc
