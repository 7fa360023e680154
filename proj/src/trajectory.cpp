#include "openqmc/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "openqmc/errors.hpp"

namespace openqmc {

void SolverSetup::validate() const {
  system.validate();
  bath.validate();
  budget.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (steps < 1) throw std::invalid_argument("steps must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  if (b_table < 0) throw std::invalid_argument("B table size must be nonnegative");
}

ModelContext::ModelContext(const SolverSetup& s)
    : setup(s),
      kernel(s.system),
      corr(discretize_bath(s.bath), s.bath.beta),
      a(coefficients_a(s.system)),
      b(coefficients_b(s.system, s.dt)) {
  setup.validate();
  if (setup.b_table > 0) corr.enable_table(setup.horizon() * (1.0 + 1e-9), setup.b_table);
}

std::vector<double> Trajectory::observable() const {
  std::vector<double> v;
  v.reserve(steps.size());
  for (const auto& s : steps) v.push_back(s.obs);
  return v;
}

double expected_observable(const Mat2& G, const Mat2& rho) {
  if (!is_hermitian(G, 1e-10) || !is_hermitian(rho, 1e-10))
    throw NumericalError("expected_observable: inputs must be Hermitian");
  const cplx v = trace(rho * G);
  if (std::abs(v.imag()) > 1e-10) throw NumericalError("expected_observable: imaginary residue too large");
  return v.real();
}

double free_observable(const SystemSpec& spec, double t) {
  const Mat2 u = matexp_herm(spec.hamiltonian(), t);
  return trace(spec.rho_s * u * spec.Os * adjoint(u)).real();
}

}  // namespace openqmc
