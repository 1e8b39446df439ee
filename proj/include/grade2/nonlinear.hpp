#pragma once

// Trilinear form b and the second-grade nonlinearity curl(upsilon(y)) x z.

#include "grade2/basis.hpp"
#include "grade2/geometry.hpp"
#include "grade2/spaces.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace grade2 {

/// b(phi, z, y) = (phi . grad z, y).
double trilinear_b(const DiskGrid& grid, const VectorField& phi, const VectorField& z, const VectorField& y);

/// (curl upsilon(y) x z, phi) = int w (z1 phi2 - z2 phi1), w = curl upsilon(y).
double curl_cross_pairing(const DiskGrid& grid, const VectorField& y, const VectorField& z, const VectorField& phi,
                          const PhysicalParams& p);
/// Same pairing as b(phi, z, upsilon(y)) - b(z, phi, upsilon(y)).
double curl_cross_pairing_dual(const DiskGrid& grid, const VectorField& y, const VectorField& z,
                               const VectorField& phi, const PhysicalParams& p);

/// curl(curl upsilon(y) x y) and (y . grad) curl upsilon(y).
ScalarField curl_of_cross(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p);
ScalarField advected_curl(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p);

/// Gaussian basis coefficients damped by 1/(1+i).
Eigen::VectorXd random_coefficients(int n, PhiloxEngine& rng);

struct Rm2Report {
  int samples = 0;
  double lin1 = 0;  // max |(curl v(y) x z, phi)| / (|y|_H3 |z|_H1 |phi|_H3)
  double lin3 = 0;  // max |(curl v(y) x z, phi)| / (|y|_H1 |z|_H3 |phi|_H3)
  double lin = 0;   // max |(curl v(y) x z, y)| / (|y|_H1^2 |z|_H3)
  std::vector<std::array<Eigen::VectorXd, 3>> triples;  // coefficients (y, z, phi)
};

/// Ratios over seeded random triples drawn from the span of the basis.
Rm2Report rm2_probe(int samples, std::uint64_t seed, const DiskGrid& grid, const GalerkinBasis& basis,
                    const PhysicalParams& p);

}  // namespace grade2
