#include "openqmc/bath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace openqmc {

void BathSpec::validate() const {
  if (L < 1) throw std::invalid_argument("bath: L must be at least 1");
  if (!(omega_c > 0.0)) throw std::invalid_argument("bath: omega_c must be positive");
  if (!(omega_max > 0.0)) throw std::invalid_argument("bath: omega_max must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("bath: beta must be positive");
  if (!(xi >= 0.0)) throw std::invalid_argument("bath: xi must be nonnegative");
  if (!std::isfinite(omega_c) || !std::isfinite(omega_max) || !std::isfinite(beta) || !std::isfinite(xi))
    throw std::invalid_argument("bath: parameters must be finite");
}

BathModes discretize_bath(const BathSpec& spec) {
  spec.validate();
  const double span = -std::expm1(-spec.omega_max / spec.omega_c);
  const double scale = std::sqrt(spec.xi * spec.omega_c * span / spec.L);
  BathModes modes;
  modes.omega.resize(spec.L);
  modes.c.resize(spec.L);
  for (int j = 1; j <= spec.L; ++j) {
    double w = j == spec.L ? spec.omega_max
                           : -spec.omega_c * std::log1p(-(static_cast<double>(j) / spec.L) * span);
    modes.omega[j - 1] = w;
    modes.c[j - 1] = w * scale;
  }
  return modes;
}

cplx correlation_B(const BathModes& modes, double beta, double tau1, double tau2) {
  const double d = std::abs(tau1) - std::abs(tau2);
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < modes.omega.size(); ++j) {
    const double w = modes.omega[j];
    const double g = 0.5 * modes.c[j] * modes.c[j] / w;
    re += g * std::cos(w * d) / std::tanh(0.5 * beta * w);
    im -= g * std::sin(w * d);
  }
  return {re, im};
}

double estimate_B_bound(const BathModes& modes, double beta, double horizon, int grid_points) {
  if (!(horizon > 0.0)) throw std::invalid_argument("estimate_B_bound: horizon must be positive");
  if (grid_points < 2) throw std::invalid_argument("estimate_B_bound: need at least 2 grid points");
  Correlation corr(modes, beta);
  double peak = 0.0;
  for (int k = 0; k < grid_points; ++k) {
    double d = -horizon + 2.0 * horizon * k / (grid_points - 1);
    peak = std::max(peak, std::abs(corr.exact(d)));
  }
  return peak / 6.0;
}

Correlation::Correlation(const BathModes& modes, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("correlation: beta must be positive");
  if (modes.omega.size() != modes.c.size()) throw std::invalid_argument("correlation: mode table size mismatch");
  const std::size_t n = modes.omega.size();
  omega_ = modes.omega;
  wc_.resize(n);
  ws_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = modes.omega[j];
    if (!(w > 0.0)) throw std::invalid_argument("correlation: frequencies must be positive");
    ws_[j] = 0.5 * modes.c[j] * modes.c[j] / w;
    wc_[j] = ws_[j] / std::tanh(0.5 * beta * w);
    if (ws_[j] != 0.0) zero_ = false;
  }
}

cplx Correlation::exact(double d) const {
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < omega_.size(); ++j) {
    const double x = omega_[j] * d;
    re += wc_[j] * std::cos(x);
    im -= ws_[j] * std::sin(x);
  }
  return {re, im};
}

cplx Correlation::at(double d) const {
  if (table_.empty()) return exact(d);
  const double u = (d - table_lo_) * table_inv_h_;
  if (!(u >= 0.0) || u >= static_cast<double>(table_.size() - 1)) return exact(d);
  const auto k = static_cast<std::size_t>(u);
  const double f = u - k;
  return table_[k] + f * (table_[k + 1] - table_[k]);
}

void Correlation::pairwise(const double* points, int n, cplx* out) const {
  if (n > kMaxPoints) throw std::invalid_argument("correlation: too many points");
  if (zero_) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) out[a * n + b] = cplx{};
    return;
  }
  if (!table_.empty()) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) out[a * n + b] = at(std::abs(points[a]) - std::abs(points[b]));
    return;
  }
  // cos(w(x - y)) and sin(w(x - y)) from per-point trigonometry, one sincos per mode and point.
  double x[kMaxPoints];
  for (int a = 0; a < n; ++a) x[a] = std::abs(points[a]);
  double re[kMaxPoints * kMaxPoints] = {};
  double im[kMaxPoints * kMaxPoints] = {};
  double cs[kMaxPoints], sn[kMaxPoints];
  for (std::size_t j = 0; j < omega_.size(); ++j) {
    const double w = omega_[j];
    for (int a = 0; a < n; ++a) {
      cs[a] = std::cos(w * x[a]);
      sn[a] = std::sin(w * x[a]);
    }
    const double gc = wc_[j], gs = ws_[j];
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        re[a * n + b] += gc * (cs[a] * cs[b] + sn[a] * sn[b]);
        im[a * n + b] -= gs * (sn[a] * cs[b] - cs[a] * sn[b]);
      }
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) out[a * n + b] = {re[a * n + b], im[a * n + b]};
}

void Correlation::enable_table(double max_abs_dtau, int intervals) {
  if (!(max_abs_dtau > 0.0) || intervals < 2) throw std::invalid_argument("correlation table: bad range");
  std::vector<cplx> t(static_cast<std::size_t>(intervals) + 1);
  const double h = 2.0 * max_abs_dtau / intervals;
  for (int k = 0; k <= intervals; ++k) t[k] = exact(-max_abs_dtau + k * h);
  table_lo_ = -max_abs_dtau;
  table_inv_h_ = 1.0 / h;
  table_ = std::move(t);
}

}  // namespace openqmc
