#include "openqmc/mat2.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace openqmc {

double max_abs(const Mat2& x) {
  double m = 0.0;
  for (const auto& v : x.a) m = std::max(m, std::abs(v));
  return m;
}

double hermiticity_defect(const Mat2& x) { return max_abs(x - adjoint(x)); }

bool is_hermitian(const Mat2& x, double tol) { return hermiticity_defect(x) <= tol; }

Mat2 outer(int i, int j) {
  if (i < 0 || i > 1 || j < 0 || j > 1) throw std::invalid_argument("outer: state index out of range");
  Mat2 m;
  m(i, j) = 1.0;
  return m;
}

int state_index(int spin) {
  if (spin == -1) return 0;
  if (spin == 1) return 1;
  throw std::invalid_argument("state label must be -1 or 1");
}

Mat2 sigma_x() { return Mat2::from(0.0, 1.0, 1.0, 0.0); }
Mat2 sigma_z() { return Mat2::from(-1.0, 0.0, 0.0, 1.0); }

std::string to_string(const Mat2& x) {
  std::ostringstream os;
  os.precision(17);
  os << "[[" << x.a[0] << ", " << x.a[1] << "], [" << x.a[2] << ", " << x.a[3] << "]]";
  return os.str();
}

}  // namespace openqmc
