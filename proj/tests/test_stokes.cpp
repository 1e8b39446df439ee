#include <doctest.h>

#include "grade2/basis.hpp"
#include "grade2/stokes.hpp"

#include <cmath>

using namespace grade2;

namespace {

const DiskGrid& grid() {
  static const DiskGrid g = build_grid(24, 12);
  return g;
}

const PhysicalParams kParams{0.1, 0.1, 1.0};

double max_abs(const VectorField& v) {
  return std::max(v.x1.values.cwiseAbs().maxCoeff(), v.x2.values.cwiseAbs().maxCoeff());
}

double l2(const DiskGrid& g, const VectorField& v) { return std::sqrt(dot(g, v, v)); }

// Smooth forcing with both solenoidal and gradient parts.
VectorField random_forcing(const DiskGrid& g, PhiloxEngine& rng) {
  double a[10];
  for (double& v : a) v = rng.normal();
  return g.sample_vector([&](double x, double y) {
    return std::pair{a[0] + a[1] * y + a[2] * x * y + a[3] * x * x * x + a[4] * std::sin(2 * x + y),
                     a[5] * x + a[6] * y * y + a[7] * x * x * y + a[8] * std::cos(x - y) + a[9] * x * x * x * x};
  });
}

}  // namespace

TEST_CASE("solving with upsilon(y) returns y") {
  const StokesSolver solver(grid(), kParams);
  const auto blocks = trial_blocks(kParams.gamma, 8, 24);
  PhiloxEngine rng(17);
  for (int t = 0; t < 50; ++t) {
    const VectorPolynomial y = VectorPolynomial::from_stream(random_trial_stream(blocks, rng));
    const VectorField ys = y.sample(grid());
    const VectorField h = solver.solve(upsilon(y, kParams).sample(grid()));
    CHECK(max_abs(h - ys) < 1e-7 * max_abs(ys));
  }
}

TEST_CASE("pure gradients are absorbed by the pressure") {
  const VectorField grad = grid().sample_vector([](double x, double y) { return std::pair{x, y}; });
  CHECK(max_abs(solve_modified_stokes(grid(), grad, kParams)) < 1e-12);
  const VectorField zero = VectorField::zeros(grid().size());
  CHECK(max_abs(solve_modified_stokes(grid(), zero, kParams)) == 0.0);
}

TEST_CASE("residual, boundary conditions and energy identity on random forcing") {
  for (const PhysicalParams& p : {kParams, PhysicalParams{0.1, 0.3, 2.5}, PhysicalParams{0.1, 0.05, 0.2}}) {
    const StokesSolver solver(grid(), p);
    PhiloxEngine rng(23);
    for (int t = 0; t < 10; ++t) {
      const VectorField f = random_forcing(grid(), rng);
      const VectorField h = solver.solve(f);
      // Independent oracle: h - alpha lap h - f must be a pure gradient.
      const VectorField r = h - p.alpha * vector_laplacian(grid(), h) - f;
      CHECK(l2(grid(), helmholtz_project(grid(), r)) < 1e-7 * l2(grid(), f));
      // The curl-trace residual compares curl values, so its scale includes them.
      const auto [yn, res] = navier_residuals(grid(), h, p);
      const double curl_scale = curl_vector(grid(), h).values.cwiseAbs().maxCoeff();
      CHECK(yn < 1e-8 * max_abs(h));
      CHECK(res < 1e-8 * (max_abs(h) + curl_scale));
      CHECK(divergence(grid(), h).values.cwiseAbs().maxCoeff() < 1e-8 * max_abs(h));

      const Deformation d = deformation(grid(), h);
      const double lhs = dot(grid(), h, h) + p.alpha * (2 * deformation_dot(grid(), d, d) +
                                                        p.gamma * boundary_dot(grid(), h, h));
      CHECK(lhs == doctest::Approx(dot(grid(), f, h)).epsilon(1e-8));
    }
  }
}

TEST_CASE("linearity") {
  const StokesSolver solver(grid(), kParams);
  PhiloxEngine rng(29);
  const VectorField f1 = random_forcing(grid(), rng), f2 = random_forcing(grid(), rng);
  const VectorField lhs = solver.solve(2.5 * f1 + (-0.75) * f2);
  const VectorField rhs = 2.5 * solver.solve(f1) + (-0.75) * solver.solve(f2);
  CHECK(max_abs(lhs - rhs) < 1e-9 * max_abs(rhs));
}

TEST_CASE("regularity constants are finite and stable under refinement") {
  const DiskGrid fine = build_grid(48, 24);
  std::vector<VectorField> coarse_samples, fine_samples;
  PhiloxEngine a(31), b(31);
  for (int t = 0; t < 20; ++t) {
    coarse_samples.push_back(random_forcing(grid(), a));
    fine_samples.push_back(random_forcing(fine, b));
  }
  const StokesRegularity c = stokes_regularity(grid(), kParams, coarse_samples);
  const StokesRegularity f = stokes_regularity(fine, kParams, fine_samples);
  CHECK(std::isfinite(c.h2_by_l2));
  CHECK(std::isfinite(c.h3_by_h1));
  CHECK(c.h2_by_l2 > 0);
  CHECK(std::max(f.h2_by_l2 / c.h2_by_l2, c.h2_by_l2 / f.h2_by_l2) < 2.0);
  CHECK(std::max(f.h3_by_h1 / c.h3_by_h1, c.h3_by_h1 / f.h3_by_h1) < 2.0);
}
