#pragma once

// Exact calculus on polynomial fields of the disk.
//
// A field is stored as Re sum_p Z_p h_p(s), with z = x1 + i x2, s = |z|^2,
// Z_p = z^p for p >= 0 and conj(z)^(-p) for p < 0.  Each h_p is a complex
// Chebyshev series in t = 2s - 1.  The Wirtinger derivatives map this class
// into itself through coefficient recurrences, so derivatives of every order
// are exact up to rounding in the coefficients and never amplify sampling
// noise the way repeated collocation does.

#include "grade2/geometry.hpp"

#include <Eigen/Dense>

#include <complex>
#include <map>

namespace grade2 {

class PolarPolynomial {
 public:
  using Series = Eigen::VectorXcd;

  PolarPolynomial() = default;

  /// Re(coef * z^m * T_k(2s - 1)); m may be negative (conjugate power).
  static PolarPolynomial monomial(int m, int k, std::complex<double> coef = 1.0);

  /// Fit a nodal field: angular DFT, per-mode Chebyshev transform, division
  /// by r^|m|.  Coefficients below chop_tol times the largest are dropped.
  static PolarPolynomial from_nodal(const DiskGrid& grid, const ScalarField& f, double chop_tol = 1e-14);

  PolarPolynomial dz() const;
  PolarPolynomial dzbar() const;
  PolarPolynomial dx1() const;
  PolarPolynomial dx2() const;
  PolarPolynomial laplacian() const;

  PolarPolynomial& operator+=(const PolarPolynomial& o);
  PolarPolynomial& operator*=(std::complex<double> s);

  ScalarField sample(const DiskGrid& grid) const;
  bool empty() const { return terms_.empty(); }
  const std::map<int, Series>& terms() const { return terms_; }

 private:
  void add_term(int p, const Series& h);
  std::map<int, Series> terms_;
};

inline PolarPolynomial operator+(PolarPolynomial a, const PolarPolynomial& b) { return a += b; }
inline PolarPolynomial operator-(PolarPolynomial a, PolarPolynomial b) { return a += (b *= -1.0); }
inline PolarPolynomial operator*(std::complex<double> s, PolarPolynomial a) { return a *= s; }

}  // namespace grade2
