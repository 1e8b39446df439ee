#include <doctest.h>

#include "grade2/errors.hpp"
#include "grade2/geometry.hpp"
#include "grade2/polar_polynomial.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace grade2;

namespace {
constexpr double pi = std::numbers::pi;

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("grid construction and layout") {
  const DiskGrid g = build_grid(16, 8);
  CHECK(g.n_angular() == 18);
  CHECK(g.size() == 16 * 18);
  const auto& r = g.radial_nodes();
  CHECK(r[0] > 0.0);
  CHECK(r[r.size() - 1] == 1.0);
  for (Eigen::Index j = 1; j < r.size(); ++j) CHECK(r[j] > r[j - 1]);
  CHECK(g.curvature() == 1.0);
  CHECK_THROWS_AS(build_grid(3, 8), ConfigError);
  CHECK_THROWS_AS(build_grid(16, 0), ConfigError);
}

TEST_CASE("quadrature of closed-form integrals") {
  const DiskGrid g = build_grid(16, 8);
  const auto one = ScalarField::constant(g.size(), 1.0);
  CHECK(integrate(g, one, Region::domain) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(integrate(g, one, Region::boundary) == doctest::Approx(2 * pi).epsilon(1e-12));
  const auto r2 = g.sample([](double x, double y) { return x * x + y * y; });
  CHECK(std::abs(integrate(g, r2, Region::domain) - pi / 2) < 1e-10);
  const auto x1 = g.sample([](double x, double) { return x; });
  CHECK(std::abs(integrate(g, x1, Region::domain)) < 1e-12);
  const auto x1sq = g.sample([](double x, double) { return x * x; });
  CHECK(std::abs(integrate(g, x1sq, Region::boundary) - pi) < 1e-10);
}

TEST_CASE("quadrature exactness on polar monomials") {
  const DiskGrid g = build_grid(16, 8);
  // r^{2a} cos(m theta) integrates to 2 pi / (2a + 2) for m = 0 and to 0 otherwise.
  for (int a = 0; a <= 14; ++a) {
    for (int m = 0; m <= 8; ++m) {
      const auto fc = g.sample([&](double x, double y) {
        return std::pow(x * x + y * y, a) * std::cos(m * std::atan2(y, x));
      });
      const auto fs = g.sample([&](double x, double y) {
        return std::pow(x * x + y * y, a) * std::sin(m * std::atan2(y, x));
      });
      const double expect = m == 0 ? 2 * pi / (2 * a + 2) : 0.0;
      CHECK(std::abs(integrate(g, fc, Region::domain) - expect) < 1e-10);
      CHECK(std::abs(integrate(g, fs, Region::domain)) < 1e-10);
    }
  }
}

TEST_CASE("differentiation of polynomials") {
  const DiskGrid g = build_grid(16, 8);
  const auto x1 = g.sample([](double x, double) { return x; });
  CHECK(max_abs(differentiate(g, x1, Derivative::dx1).values - Eigen::VectorXd::Ones(g.size())) < 1e-10);
  CHECK(max_abs(differentiate(g, x1, Derivative::dx2).values) < 1e-10);
  const auto r2 = g.sample([](double x, double y) { return x * x + y * y; });
  CHECK(max_abs(differentiate(g, r2, Derivative::laplacian).values.array() - 4.0) < 1e-10);
  const auto r4 = g.sample([](double x, double y) { return std::pow(x * x + y * y, 2); });
  CHECK(max_abs(differentiate(g, r4, Derivative::bilaplacian).values.array() - 64.0) < 1e-10);

  // Mixed polynomial checked against hand derivatives.
  const auto p = g.sample([](double x, double y) { return x * x * x * y - 2 * x * y * y + 3 * y; });
  const auto px = g.sample([](double x, double y) { return 3 * x * x * y - 2 * y * y; });
  const auto py = g.sample([](double x, double y) { return x * x * x - 4 * x * y + 3; });
  const auto lap = g.sample([](double x, double y) { return 6 * x * y - 4 * x; });
  CHECK(max_abs(differentiate(g, p, Derivative::dx1).values - px.values) < 1e-10);
  CHECK(max_abs(differentiate(g, p, Derivative::dx2).values - py.values) < 1e-10);
  CHECK(max_abs(differentiate(g, p, Derivative::laplacian).values - lap.values) < 1e-10);
}

TEST_CASE("curl and grad_perp") {
  const DiskGrid g = build_grid(16, 8);
  const auto rot = g.sample_vector([](double x, double y) { return std::pair{-y, x}; });
  CHECK(max_abs(curl_vector(g, rot).values.array() - 2.0) < 1e-10);

  const auto f = g.sample([](double x, double y) { return 1 - x * x - y * y; });
  const VectorField h = grad_perp(g, f);
  CHECK(max_abs(h.x1.values - 2.0 * g.x2().values) < 1e-10);
  CHECK(max_abs(h.x2.values + 2.0 * g.x1().values) < 1e-10);
  CHECK(max_abs(curl_vector(g, h).values.array() + 4.0) < 1e-10);

  const VectorField z = grad_perp(g, ScalarField::zeros(g.size()));
  CHECK(max_abs(z.x1.values) == 0.0);
  CHECK(max_abs(z.x2.values) == 0.0);
}

TEST_CASE("grad_perp is divergence free and tangential for psi vanishing on the boundary") {
  const DiskGrid g = build_grid(20, 10);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 5; ++trial) {
    const double a = n01(rng), b = n01(rng), c = n01(rng);
    const auto f = g.sample([&](double x, double y) {
      const double q = 1 - x * x - y * y;
      return q * (a + b * x * y * y + c * std::pow(x, 5));
    });
    const VectorField h = grad_perp(g, f);
    const double scale = std::max(1.0, max_abs(h.x1.values) + max_abs(h.x2.values));
    CHECK(max_abs(divergence(g, h).values) < 1e-8 * scale);
    const Eigen::VectorXd hn = g.boundary_values(h.x1).cwiseProduct(g.normal_x1()) +
                               g.boundary_values(h.x2).cwiseProduct(g.normal_x2());
    CHECK(max_abs(hn) < 1e-10 * scale);
    const auto lap = differentiate(g, f, Derivative::laplacian);
    CHECK(max_abs(curl_vector(g, h).values - lap.values) < 1e-10 * scale * 10);
  }
}

TEST_CASE("integration by parts") {
  const DiskGrid g = build_grid(20, 10);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 5; ++trial) {
    double a[6];
    for (double& v : a) v = n01(rng);
    const auto f = g.sample([&](double x, double y) {
      return a[0] * x * x * y + a[1] * std::pow(x, 4) + a[2] * y * y * y + a[3] * x * y;
    });
    const auto h = g.sample([&](double x, double y) { return a[4] * x * y * y + a[5] * (1 + x * x); });
    const double lhs = dot(g, differentiate(g, f, Derivative::laplacian), h);
    const VectorField gf = gradient(g, f);
    const VectorField gh = gradient(g, h);
    const ScalarField dn(g.x1().values.cwiseProduct(gf.x1.values) + g.x2().values.cwiseProduct(gf.x2.values));
    const double bnd = integrate(g, multiply(dn, h), Region::boundary);
    CHECK(std::abs(lhs + dot(g, gf, gh) - bnd) < 1e-8);
  }
}

TEST_CASE("spectral round trip") {
  const DiskGrid g = build_grid(24, 12);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  ScalarField f = ScalarField::zeros(g.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = n01(rng);
  const ScalarField back = g.to_nodal(g.to_spectral(f));
  CHECK(max_abs(back.values - f.values) < 1e-12 * max_abs(f.values));
  const ScalarField p = g.sample([](double x, double y) { return x * x * y + 0.5; });
  const SpectralField s = g.to_spectral(p);
  // x^2 y = r^3 (sin t - sin 3t)/4: only the m = 1 and m = 3 sine slots besides the mean.
  for (int slot = 0; slot < g.n_angular(); ++slot) {
    if (slot == 0 || slot == 2 || slot == 6) continue;
    CHECK(s.coefficients.col(slot).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("modal calculus against closed-form powers of z and |z|^2") {
  // Delta(z^m s^k) = 4 k (m + k) z^m s^(k-1).
  const DiskGrid g = build_grid(24, 12);
  for (auto [m, k] : {std::pair{0, 2}, std::pair{4, 10}, std::pair{7, 8}, std::pair{1, 11}}) {
    auto field = [&](double coef, int kk) {
      return g.sample([&](double x, double y) {
        const double s = x * x + y * y;
        return coef * std::pow(s, kk) * std::pow(std::sqrt(s), m) * std::cos(m * std::atan2(y, x));
      });
    };
    const ScalarField f = field(1.0, k);
    const ScalarField lap = field(4.0 * k * (m + k), k - 1);
    const ScalarField bilap = field(16.0 * k * (m + k) * (k - 1) * (m + k - 1), k - 2);
    CHECK(max_abs(differentiate(g, f, Derivative::laplacian).values - lap.values) <
          1e-12 * max_abs(lap.values));
    CHECK(max_abs(differentiate(g, f, Derivative::bilaplacian).values - bilap.values) <
          1e-12 * max_abs(bilap.values));
  }
}

TEST_CASE("modal fit reproduces polynomial samples") {
  const DiskGrid g = build_grid(24, 12);
  const ScalarField f = g.sample([](double x, double y) { return std::pow(x, 7) * y * y - 3 * x * y + 0.25; });
  const ScalarField back = PolarPolynomial::from_nodal(g, f).sample(g);
  CHECK(max_abs(back.values - f.values) < 1e-13);
}
