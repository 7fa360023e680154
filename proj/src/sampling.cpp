#include "openqmc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "openqmc/bath.hpp"

namespace openqmc {

void SampleBudget::validate() const {
  if (!(M0 > 0.0) || !std::isfinite(M0)) throw std::invalid_argument("budget: M0 must be positive");
  if (!(Bbound >= 0.0) || !std::isfinite(Bbound)) throw std::invalid_argument("budget: B bound must be nonnegative");
  if (Mbar < 1 || Mbar > 15) throw std::invalid_argument("budget: Mbar must lie in 1..15");
}

std::vector<double> shift_map(std::span<const double> points, double dt) {
  if (dt < 0.0) throw std::invalid_argument("shift_map: dt must be nonnegative");
  std::vector<double> out(points.begin(), points.end());
  for (auto& s : out) s = s >= 0.0 ? s + dt : s - dt;
  return out;
}

void sample_simplex(int m, double lo, double hi, RngStream& rng, double* out) {
  if (m < 1) throw std::invalid_argument("sample_simplex: m must be positive");
  if (!(lo < hi)) throw std::invalid_argument("sample_simplex: requires lo < hi");
  const double w = hi - lo;
  for (int k = 0; k < m; ++k) out[k] = lo + w * rng.uniform();
  std::sort(out, out + m);
}

std::vector<double> sample_simplex(int m, double lo, double hi, RngStream& rng) {
  std::vector<double> v(m);
  sample_simplex(m, lo, hi, rng, v.data());
  return v;
}

int sample_shell(int m, double t_prev, double dt, RngStream& rng, double* out) {
  if (!(t_prev >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("sample_shell: requires t_prev >= 0 and dt > 0");
  if (m < 1 || m > kMaxPoints) throw std::invalid_argument("sample_shell: m out of range");
  const double edge = t_prev + dt;
  const double p = dt / edge;
  // number of points in the band: Binomial(m, p) conditioned on at least one
  int inside = m;
  if (p < 1.0) {
    const double q = 1.0 - p;
    const double none = std::pow(q, m);
    double target = rng.uniform() * (1.0 - none);
    double pmf = none * m * p / q;  // P(K = 1)
    inside = 1;
    while (inside < m && target >= pmf) {
      target -= pmf;
      pmf *= (static_cast<double>(m - inside) / (inside + 1)) * (p / q);
      ++inside;
    }
  }
  for (int k = 0; k < inside; ++k) out[k] = dt * (2.0 * rng.uniform() - 1.0);
  const double outer = edge - dt;
  for (int k = inside; k < m; ++k) {
    const double x = outer * (2.0 * rng.uniform() - 1.0);
    out[k] = x < 0.0 ? x - dt : x + dt;
  }
  std::sort(out, out + m);
  return inside;
}

std::vector<double> sample_shell(int m, double t_prev, double dt, RngStream& rng) {
  std::vector<double> v(m);
  sample_shell(m, t_prev, dt, rng, v.data());
  return v;
}

double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

double simplex_volume(int m, double width) { return std::pow(width, m) / factorial(m); }

double shell_volume(int m, int n, double dt) {
  return (std::pow(2.0 * (n + 1) * dt, m) - std::pow(2.0 * n * dt, m)) / factorial(m);
}

std::int64_t sample_count(CountKind kind, int n, int m, double dt, const SampleBudget& budget) {
  if (m < 1 || m % 2 == 0) throw std::invalid_argument("sample_count: m must be odd");
  if (n < 0) throw std::invalid_argument("sample_count: step index must be nonnegative");
  const double weight = budget.M0 * std::pow(budget.Bbound, 0.5 * (m + 1)) / double_factorial(m - 1);
  double vol = 0.0;
  switch (kind) {
    case CountKind::DysonFull: vol = std::pow(2.0 * n * dt, m); break;
    case CountKind::Shell: vol = std::pow(2.0 * (n + 1) * dt, m) - std::pow(2.0 * n * dt, m); break;
    case CountKind::Inchworm: vol = std::pow(n * dt, m); break;
  }
  return std::llround(weight * vol);
}

std::int64_t bare_sample_count(int m, double t, const SampleBudget& budget) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("bare_sample_count: m must be even");
  return std::llround(budget.M0 * simplex_volume(m, 2.0 * t) * double_factorial(m - 1) *
                      std::pow(budget.Bbound, 0.5 * m));
}

}  // namespace openqmc
