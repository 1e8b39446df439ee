#pragma once

// Inner products, norms and projections of the divergence-free spaces
// V, W and W~ on the disk.

#include "grade2/geometry.hpp"
#include "grade2/polar_polynomial.hpp"

#include <vector>

namespace grade2 {

struct PhysicalParams {
  double nu = 0.1;
  double alpha = 0.1;
  double gamma = 1.0;

  /// Throws ConfigError unless all three are strictly positive.
  void validate() const;
};

struct NormReport {
  double l2 = 0, V = 0, Wtilde = 0, W = 0, H1 = 0, H2 = 0, H3 = 0;
};

/// Velocity in modal form; derivatives of any order are exact.
struct VectorPolynomial {
  PolarPolynomial x1, x2;

  static VectorPolynomial from_nodal(const DiskGrid& grid, const VectorField& y);
  /// grad_perp of a stream function.
  static VectorPolynomial from_stream(const PolarPolynomial& psi);

  VectorPolynomial dx1() const { return {x1.dx1(), x2.dx1()}; }
  VectorPolynomial dx2() const { return {x1.dx2(), x2.dx2()}; }
  VectorPolynomial laplacian() const { return {x1.laplacian(), x2.laplacian()}; }
  PolarPolynomial curl() const { return x2.dx1() - x1.dx2(); }
  PolarPolynomial divergence() const { return x1.dx1() + x2.dx2(); }
  VectorField sample(const DiskGrid& grid) const { return {x1.sample(grid), x2.sample(grid)}; }
};

VectorPolynomial operator+(VectorPolynomial a, const VectorPolynomial& b);
VectorPolynomial operator*(double s, VectorPolynomial a);

VectorField upsilon(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p);
VectorPolynomial upsilon(const VectorPolynomial& y, const PhysicalParams& p);

/// Symmetric gradient components (D11, D22, D12).
struct Deformation {
  ScalarField d11, d22, d12;
};
Deformation deformation(const DiskGrid& grid, const VectorField& y);
Deformation deformation(const DiskGrid& grid, const VectorPolynomial& y);
/// (Dy, Dz) = sum_ij Dy_ij Dz_ij.
double deformation_dot(const DiskGrid& grid, const Deformation& a, const Deformation& b);

double inner_V(const DiskGrid& grid, const VectorField& y, const VectorField& z, const PhysicalParams& p);
double inner_Wtilde(const DiskGrid& grid, const VectorField& y, const VectorField& z, const PhysicalParams& p);

/// Leray-Helmholtz projection: per Fourier mode solves the Neumann problem
/// laplacian(phi) = div u, d(phi)/dn = u.n and returns u - grad(phi).
VectorField helmholtz_project(const DiskGrid& grid, const VectorField& u);

/// (max |y.n|, max |curl y - (2k - gamma) y.tau|) over the boundary nodes.
std::pair<double, double> navier_residuals(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p);

/// Sobolev norm summing each distinct derivative multi-index once.
double sobolev_norm(const DiskGrid& grid, const VectorPolynomial& y, int order);

NormReport norms(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p);

/// Largest observed ratio lhs / rhs over a sample of fields, per inequality.
struct ObservedConstants {
  double korn = 0;             // |y|_H1 / (|Dy|_2 + |y|_2)
  double sigma_l2 = 0;         // |v - Pv|_2 / |y|_H1 with v = upsilon(y)
  double sigma_h1 = 0;         // |v - Pv|_H1 / |y|_H2
  double h2_by_projection = 0; // |y|_H2 / (|P v|_2 + |y|_H1)
  double h3_by_curl = 0;       // |y|_H3 / (|curl v|_2 + |y|_H1)
};
ObservedConstants observed_constants(const DiskGrid& grid, const PhysicalParams& p,
                                     const std::vector<VectorField>& samples);

}  // namespace grade2
