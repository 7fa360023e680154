#pragma once

#include <array>
#include <complex>
#include <string>

namespace openqmc {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

// 2x2 complex matrix, row-major, basis ordered (|-1>, |1>).
struct Mat2 {
  std::array<cplx, 4> a{};

  cplx& operator()(int r, int c) { return a[2 * r + c]; }
  const cplx& operator()(int r, int c) const { return a[2 * r + c]; }

  static Mat2 zero() { return Mat2{}; }
  static Mat2 identity() { return Mat2{{cplx{1.0}, cplx{}, cplx{}, cplx{1.0}}}; }
  static Mat2 from(cplx a00, cplx a01, cplx a10, cplx a11) { return Mat2{{a00, a01, a10, a11}}; }

  Mat2& operator+=(const Mat2& o) {
    for (int k = 0; k < 4; ++k) a[k] += o.a[k];
    return *this;
  }
  Mat2& operator-=(const Mat2& o) {
    for (int k = 0; k < 4; ++k) a[k] -= o.a[k];
    return *this;
  }
  Mat2& operator*=(cplx s) {
    for (auto& x : a) x *= s;
    return *this;
  }

  bool operator==(const Mat2&) const = default;
};

inline Mat2 operator+(Mat2 x, const Mat2& y) { return x += y; }
inline Mat2 operator-(Mat2 x, const Mat2& y) { return x -= y; }
inline Mat2 operator*(Mat2 x, cplx s) { return x *= s; }
inline Mat2 operator*(cplx s, Mat2 x) { return x *= s; }
inline Mat2 operator*(double s, Mat2 x) { return x *= cplx{s}; }

inline Mat2 operator*(const Mat2& x, const Mat2& y) {
  return Mat2{{x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
               x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]}};
}

inline Mat2 adjoint(const Mat2& x) {
  return Mat2{{std::conj(x.a[0]), std::conj(x.a[2]), std::conj(x.a[1]), std::conj(x.a[3])}};
}

inline cplx trace(const Mat2& x) { return x.a[0] + x.a[3]; }

inline Mat2 commutator(const Mat2& x, const Mat2& y) { return x * y - y * x; }

// Largest entry modulus.
double max_abs(const Mat2& x);

double hermiticity_defect(const Mat2& x);
bool is_hermitian(const Mat2& x, double tol = 1e-12);

// |i><j| for state indices in {0, 1}.
Mat2 outer(int i, int j);

// Maps a spin label in {-1, 1} to its basis index.
int state_index(int spin);

Mat2 sigma_x();
Mat2 sigma_z();

// The four operators indexed [i][j] by state index, e.g. basis accumulators.
using MatGrid = std::array<std::array<Mat2, 2>, 2>;

std::string to_string(const Mat2& x);

}  // namespace openqmc
