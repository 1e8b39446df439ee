#include <doctest.h>

#include "grade2/nonlinear.hpp"

#include <cmath>
#include <numbers>

using namespace grade2;

namespace {

const DiskGrid& grid() {
  static const DiskGrid g = build_grid(24, 12);
  return g;
}

const PhysicalParams kParams{0.1, 0.1, 1.0};

// Fields of moderate degree so that triple products stay resolved by the grid.
VectorField random_field(PhiloxEngine& rng) {
  static const auto blocks = trial_blocks(kParams.gamma, 5, 16);
  return VectorPolynomial::from_stream(random_trial_stream(blocks, rng)).sample(grid());
}

double h_norm(const VectorField& y, int order) {
  return sobolev_norm(grid(), VectorPolynomial::from_nodal(grid(), y), order);
}

}  // namespace

TEST_CASE("trilinear form: zero slots and antisymmetry") {
  PhiloxEngine rng(41);
  const VectorField zero = VectorField::zeros(grid().size());
  for (int t = 0; t < 10; ++t) {
    const VectorField phi = random_field(rng), z = random_field(rng), y = random_field(rng);
    const double scale = h_norm(phi, 1) * h_norm(z, 1) * h_norm(y, 1);
    CHECK(std::abs(trilinear_b(grid(), phi, y, y)) < 1e-8 * scale);
    CHECK(std::abs(trilinear_b(grid(), phi, z, y) + trilinear_b(grid(), phi, y, z)) < 1e-8 * scale);
    CHECK(trilinear_b(grid(), zero, z, y) == 0.0);
    CHECK(trilinear_b(grid(), phi, zero, y) == 0.0);
    CHECK(trilinear_b(grid(), phi, z, zero) == 0.0);
  }
}

TEST_CASE("trilinear form against a dense midpoint quadrature") {
  // phi = (-x2, x1), z = (x1 x2, x1^2), y = (x2^2, x1).
  auto integrand = [](double x, double y) {
    const double p1 = -y, p2 = x;
    const double z1x = y, z1y = x, z2x = 2 * x, z2y = 0;
    const double a1 = p1 * z1x + p2 * z1y, a2 = p1 * z2x + p2 * z2y;
    return a1 * (y * y) + a2 * x;
  };
  const int nr = 2000, nt = 512;
  double oracle = 0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) / nr;
    for (int k = 0; k < nt; ++k) {
      const double th = 2 * std::numbers::pi * k / nt;
      oracle += integrand(r * std::cos(th), r * std::sin(th)) * r;
    }
  }
  oracle *= (1.0 / nr) * (2 * std::numbers::pi / nt);
  const VectorField phi = grid().sample_vector([](double x, double y) { return std::pair{-y, x}; });
  const VectorField z = grid().sample_vector([](double x, double y) { return std::pair{x * y, x * x}; });
  const VectorField y = grid().sample_vector([](double x, double yy) { return std::pair{yy * yy, x}; });
  CHECK(trilinear_b(grid(), phi, z, y) == doctest::Approx(oracle).epsilon(1e-6).scale(1.0));

  const VectorField z0 = grid().sample_vector([](double x, double) { return std::pair{0.0 * x, 0.0}; });
  const VectorField zx = grid().sample_vector([](double, double yy) { return std::pair{yy, 0.0}; });
  const VectorField y0 = grid().sample_vector([](double x, double) { return std::pair{0.0, x}; });
  CHECK(std::abs(trilinear_b(grid(), phi, zx, y0)) < 1e-14);
  CHECK(trilinear_b(grid(), phi, z0, y0) == 0.0);
}

TEST_CASE("curl-cross pairing: dual formula, antisymmetry, energy neutrality") {
  PhiloxEngine rng(43);
  for (int t = 0; t < 20; ++t) {
    const VectorField y = random_field(rng), z = random_field(rng), phi = random_field(rng);
    const double scale = h_norm(y, 3) * h_norm(z, 1) * h_norm(phi, 1);
    const double direct = curl_cross_pairing(grid(), y, z, phi, kParams);
    const double dual = curl_cross_pairing_dual(grid(), y, z, phi, kParams);
    CHECK(std::abs(direct - dual) < 1e-7 * std::max(std::abs(direct), 1e-3 * scale));
    CHECK(std::abs(curl_cross_pairing(grid(), y, z, z, kParams)) < 1e-8 * scale);
    CHECK(std::abs(curl_cross_pairing(grid(), y, y, y, kParams)) < 1e-8 * scale);
  }
  const VectorField zero = VectorField::zeros(grid().size());
  const VectorField z = random_field(rng);
  CHECK(curl_cross_pairing(grid(), zero, z, z, kParams) == 0.0);
}

TEST_CASE("curl of the nonlinearity is the advected vorticity") {
  PhiloxEngine rng(47);
  for (int t = 0; t < 10; ++t) {
    const VectorField y = random_field(rng);
    const ScalarField a = curl_of_cross(grid(), y, kParams);
    const ScalarField b = advected_curl(grid(), y, kParams);
    const double scale = b.values.cwiseAbs().maxCoeff();
    CHECK((a - b).values.cwiseAbs().maxCoeff() < 1e-7 * scale);
    const ScalarField w = upsilon(VectorPolynomial::from_nodal(grid(), y), kParams).curl().sample(grid());
    CHECK(std::abs(dot(grid(), b, w)) < 1e-8 * std::sqrt(dot(grid(), b, b) * dot(grid(), w, w)));
  }
}

TEST_CASE("rm2 probe") {
  const GalerkinBasis coarse = build_basis(grid(), kParams, 16);
  const Rm2Report r = rm2_probe(10, 5, grid(), coarse, kParams);
  CHECK(r.samples == 10);
  for (double v : {r.lin1, r.lin3, r.lin}) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  // Spot check: the self-pairing ratio of sample 0, recomputed by hand.
  const auto& c = r.triples[0];
  const VectorField y = reconstruct(c[0], coarse), z = reconstruct(c[1], coarse);
  const double by_hand = std::abs(curl_cross_pairing(grid(), y, z, y, kParams)) /
                         (std::pow(h_norm(y, 1), 2) * h_norm(z, 3));
  CHECK(by_hand <= r.lin * (1 + 1e-12));
  PhiloxEngine same(5);
  const Eigen::VectorXd first = random_coefficients(coarse.n_modes, same);
  CHECK((first - c[0]).norm() == 0.0);

  const DiskGrid fine = build_grid(48, 12);
  const GalerkinBasis refined = build_basis(fine, kParams, 16);
  const Rm2Report f = rm2_probe(10, 5, fine, refined, kParams);
  CHECK(std::max(f.lin1 / r.lin1, r.lin1 / f.lin1) < 2.0);
  CHECK(std::max(f.lin3 / r.lin3, r.lin3 / f.lin3) < 2.0);
  CHECK(std::max(f.lin / r.lin, r.lin / f.lin) < 2.0);
}
