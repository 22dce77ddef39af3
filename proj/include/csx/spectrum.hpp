#pragma once

// Eigenvalues of small real matrices. n <= 3 goes through the characteristic
// polynomial (closed form, one Newton polish per root); larger n uses
// Eigen's Hessenberg QR.

#include "csx/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace csx {

using Complex = std::complex<double>;

namespace detail {

inline Complex eval_monic_cubic(double a, double b, double c, Complex z) {
  return ((z + a) * z + b) * z + c;
}

inline Complex eval_monic_cubic_derivative(double a, double b, Complex z) {
  return (3.0 * z + 2.0 * a) * z + b;
}

// Roots of z^3 + a z^2 + b z + c.
inline std::array<Complex, 3> monic_cubic_roots(double a, double b, double c) {
  const double q = (a * a - 3.0 * b) / 9.0;
  const double r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
  const double q3 = q * q * q;
  std::array<Complex, 3> z;
  if (r * r < q3) {
    const double theta = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
    const double s = -2.0 * std::sqrt(q);
    z[0] = s * std::cos(theta / 3.0) - a / 3.0;
    z[1] = s * std::cos((theta + 2.0 * std::numbers::pi) / 3.0) - a / 3.0;
    z[2] = s * std::cos((theta - 2.0 * std::numbers::pi) / 3.0) - a / 3.0;
  } else {
    const double big = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r * r - q3)), r);
    const double small = big != 0.0 ? q / big : 0.0;
    const double re = -0.5 * (big + small) - a / 3.0;
    const double im = 0.5 * std::sqrt(3.0) * (big - small);
    z[0] = big + small - a / 3.0;
    z[1] = Complex(re, im);
    z[2] = Complex(re, -im);
  }
  // One Newton step; kept only when it reduces the residual.
  for (auto& root : z) {
    const Complex p = eval_monic_cubic(a, b, c, root);
    const Complex dp = eval_monic_cubic_derivative(a, b, root);
    if (std::abs(dp) > 0.0) {
      Complex next = root - p / dp;
      if (root.imag() == 0.0) next = next.real();
      if (std::abs(eval_monic_cubic(a, b, c, next)) < std::abs(p)) root = next;
    }
  }
  if (z[1].imag() != 0.0) z[2] = std::conj(z[1]);
  return z;
}

inline void sort_by_modulus(std::vector<Complex>& v) {
  std::sort(v.begin(), v.end(), [](const Complex& x, const Complex& y) {
    const double ax = std::abs(x), ay = std::abs(y);
    if (ax != ay) return ax < ay;
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
}

}  // namespace detail

/// Eigenvalues sorted by modulus ascending (ties by real, then imaginary part).
template <typename Derived>
std::vector<Complex> eigen3(const Eigen::MatrixBase<Derived>& m) {
  const Eigen::Index n = m.rows();
  std::vector<Complex> out;
  if (n == 1) {
    out.emplace_back(m(0, 0));
  } else if (n == 2) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = 0.25 * tr * tr - det;
    if (disc >= 0.0) {
      // Avoid cancellation: larger-magnitude root first, then det / root.
      const double big = 0.5 * tr + std::copysign(std::sqrt(disc), tr);
      out.emplace_back(big);
      out.emplace_back(big != 0.0 ? det / big : 0.0);
    } else {
      out.emplace_back(0.5 * tr, std::sqrt(-disc));
      out.emplace_back(0.5 * tr, -std::sqrt(-disc));
    }
  } else if (n == 3) {
    const double tr = m.trace();
    const double minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                          m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    const double det = m.determinant();
    const auto z = detail::monic_cubic_roots(-tr, minors, -det);
    out.assign(z.begin(), z.end());
  } else if (n > 3) {
    Eigen::EigenSolver<MatX> solver(MatX(m), false);
    const auto& ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) out.emplace_back(ev[i]);
  }
  detail::sort_by_modulus(out);
  return out;
}

/// Unit right null vector of (M - lambda I) for a real eigenvalue lambda.
template <int Dim>
Vec<Dim> real_eigenvector(const Mat<Dim>& m, double lambda) {
  Mat<Dim> shifted = m;
  shifted.diagonal().array() -= lambda;
  Eigen::JacobiSVD<Mat<Dim>> svd(shifted, Eigen::ComputeFullV);
  Vec<Dim> v = svd.matrixV().col(m.cols() - 1);
  return v / v.norm();
}

/// Unit left eigenvector: u^T M = lambda u^T.
template <int Dim>
Vec<Dim> real_left_eigenvector(const Mat<Dim>& m, double lambda) {
  return real_eigenvector<Dim>(m.transpose(), lambda);
}

/// Flips the sign so that the component sum is nonnegative.
template <int Dim>
Vec<Dim> sign_normalized(Vec<Dim> v) {
  if (v.sum() < 0.0) v = -v;
  return v;
}

}  // namespace csx
