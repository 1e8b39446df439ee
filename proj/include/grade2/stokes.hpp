#pragma once

// Modified Stokes problem with Navier slip:
//   h - alpha lap h + grad p = f,  div h = 0,  h.n = 0,  curl h = (2k - gamma) h.tau on r = 1.
// With h = grad_perp(phi) and u = curl h it reduces, per Fourier mode, to
//   lap phi = u,  phi(1) = 0,  u - alpha lap u = curl f,  u(1) = (2 - gamma) phi'(1),
// which is assembled as one coupled collocation system.

#include "grade2/geometry.hpp"
#include "grade2/polar_polynomial.hpp"
#include "grade2/spaces.hpp"

#include <Eigen/Dense>

#include <vector>

namespace grade2 {

class StokesSolver {
 public:
  /// Factorizes every Fourier mode once; throws NumericalError when a mode
  /// system is numerically singular.
  StokesSolver(const DiskGrid& grid, const PhysicalParams& p);

  /// Stream function phi of the solution for the given curl f.
  PolarPolynomial solve_stream(const ScalarField& curl_f) const;
  VectorField solve(const VectorField& f) const;

  const PhysicalParams& params() const { return params_; }

 private:
  const DiskGrid* grid_;
  PhysicalParams params_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;  // indexed by m
};

/// One-shot convenience wrapper around StokesSolver.
VectorField solve_modified_stokes(const DiskGrid& grid, const VectorField& f, const PhysicalParams& p);

/// Largest observed |h|_H2 / |f|_2 and |h|_H3 / |f|_H1 over the samples.
struct StokesRegularity {
  double h2_by_l2 = 0;
  double h3_by_h1 = 0;
};
StokesRegularity stokes_regularity(const DiskGrid& grid, const PhysicalParams& p,
                                   const std::vector<VectorField>& samples);

}  // namespace grade2
