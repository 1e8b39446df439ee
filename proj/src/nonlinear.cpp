#include "grade2/nonlinear.hpp"

#include "grade2/errors.hpp"

#include <algorithm>
#include <cmath>

namespace grade2 {

namespace {

ScalarField omega(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p) {
  return upsilon(VectorPolynomial::from_nodal(grid, y), p).curl().sample(grid);
}

}  // namespace

double trilinear_b(const DiskGrid& grid, const VectorField& phi, const VectorField& z, const VectorField& y) {
  const VectorPolynomial zp = VectorPolynomial::from_nodal(grid, z);
  const VectorField dz1 = zp.dx1().sample(grid);
  const VectorField dz2 = zp.dx2().sample(grid);
  // (phi . grad) z, componentwise.
  const VectorField adv{multiply(phi.x1, dz1.x1) + multiply(phi.x2, dz2.x1),
                        multiply(phi.x1, dz1.x2) + multiply(phi.x2, dz2.x2)};
  return dot(grid, adv, y);
}

double curl_cross_pairing(const DiskGrid& grid, const VectorField& y, const VectorField& z, const VectorField& phi,
                          const PhysicalParams& p) {
  const ScalarField w = omega(grid, y, p);
  return dot(grid, w, multiply(z.x1, phi.x2) - multiply(z.x2, phi.x1));
}

double curl_cross_pairing_dual(const DiskGrid& grid, const VectorField& y, const VectorField& z,
                               const VectorField& phi, const PhysicalParams& p) {
  const VectorField v = upsilon(VectorPolynomial::from_nodal(grid, y), p).sample(grid);
  return trilinear_b(grid, phi, z, v) - trilinear_b(grid, z, phi, v);
}

ScalarField curl_of_cross(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p) {
  const ScalarField w = omega(grid, y, p);
  const VectorField cross{-1.0 * multiply(w, y.x2), multiply(w, y.x1)};
  return VectorPolynomial::from_nodal(grid, cross).curl().sample(grid);
}

ScalarField advected_curl(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p) {
  const PolarPolynomial w = upsilon(VectorPolynomial::from_nodal(grid, y), p).curl();
  return multiply(y.x1, w.dx1().sample(grid)) + multiply(y.x2, w.dx2().sample(grid));
}

Eigen::VectorXd random_coefficients(int n, PhiloxEngine& rng) {
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c[i] = rng.normal() / (1.0 + i);
  return c;
}

Rm2Report rm2_probe(int samples, std::uint64_t seed, const DiskGrid& grid, const GalerkinBasis& basis,
                    const PhysicalParams& p) {
  if (samples < 1) throw ConfigError("rm2 probe needs at least one sample");
  PhiloxEngine rng(seed);
  Rm2Report out;
  out.samples = samples;
  for (int s = 0; s < samples; ++s) {
    std::array<Eigen::VectorXd, 3> c;
    for (auto& v : c) v = random_coefficients(basis.n_modes, rng);
    const VectorField y = reconstruct(c[0], basis), z = reconstruct(c[1], basis), phi = reconstruct(c[2], basis);
    auto h = [&](const Eigen::VectorXd& coef, int order) {
      return sobolev_norm(grid, VectorPolynomial::from_stream(reconstruct_stream(coef, basis)), order);
    };
    const double y1 = h(c[0], 1), y3 = h(c[0], 3), z1 = h(c[1], 1), z3 = h(c[1], 3), f3 = h(c[2], 3);
    const double pair = std::abs(curl_cross_pairing(grid, y, z, phi, p));
    const double self = std::abs(curl_cross_pairing(grid, y, z, y, p));
    out.lin1 = std::max(out.lin1, pair / (y3 * z1 * f3));
    out.lin3 = std::max(out.lin3, pair / (y1 * z3 * f3));
    out.lin = std::max(out.lin, self / (y1 * y1 * z3));
    out.triples.push_back(c);
  }
  return out;
}

}  // namespace grade2
