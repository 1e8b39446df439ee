#include <doctest.h>

#include "grade2/errors.hpp"
#include "grade2/experiments.hpp"
#include "grade2/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

using namespace grade2;

namespace {

const DiskGrid& grid() {
  static const DiskGrid g = build_grid(24, 12);
  return g;
}

const PhysicalParams kParams{0.1, 0.1, 1.0};

struct Master {
  GalerkinBasis basis;
  BasisGrams grams;
};

const Master& master() {
  static const Master m = [] {
    GalerkinBasis b = build_basis(grid(), kParams, 32);
    BasisGrams g = compute_grams(grid(), b);
    return Master{std::move(b), std::move(g)};
  }();
  return m;
}

GalerkinSystem noisy_system(std::vector<NoiseChannel> noise, bool nonlinear = true, double rotation = 0.0) {
  const Master& m = master();
  ForcingSpec f;
  if (rotation != 0) {
    f.kind = ForcingSpec::Kind::rotation;
    f.amplitude = rotation;
  }
  return make_system(grid(), m.basis, m.grams, make_forcing(grid(), m.basis, f),
                     make_noise(std::move(noise), m.basis.n_modes), nonlinear);
}

Eigen::VectorXd low_modes(int n, double amp) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  c[0] = amp;
  c[1] = 0.5 * amp;
  c[3] = -0.3 * amp;
  return c;
}

SimulationSettings short_run(double T = 0.25, int steps = 256) {
  SimulationSettings s;
  s.T = T;
  s.dt = T / steps;
  s.keep_coefficients = false;
  return s;
}

}  // namespace

TEST_CASE("order-independent reductions") {
  std::vector<double> v{1e16, 1.0, -1e16, 3.5, 1e-3, 2.25, -7.0};
  const double a = stable_sum(v);
  std::mt19937 g(3);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(v.begin(), v.end(), g);
    CHECK(stable_sum(v) == a);
  }
  const Estimate e = estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(estimate({}).count == 0);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(100, [&](int i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](int i) { if (i == 7) throw std::runtime_error("x"); }), std::runtime_error);
}

TEST_CASE("ensemble: dissipative deterministic case and argument checks") {
  const GalerkinSystem sys = noisy_system({});
  const Eigen::VectorXd c0 = low_modes(sys.n(), 0.4);
  const EnsembleSummary e = run_ensemble(sys, short_run(), c0, 4, 1);
  CHECK(e.sup_energy.mean == c0.squaredNorm());
  CHECK(e.sup_energy.std_error == 0.0);
  CHECK(e.martingale.mean == 0.0);
  CHECK(e.completed == 4);
  CHECK(std::isfinite(e.ineq1.c_obs));
  CHECK(e.ineq1.c_obs > 0);
  CHECK(e.ineq222.c_obs > 0);
  CHECK(e.lp1.c_obs > 0);
  CHECK_THROWS_AS(run_ensemble(sys, short_run(), c0, 1, 1), ConfigError);
}

TEST_CASE("ensemble: multiplicative noise keeps zero absorbing and scales linearly") {
  const GalerkinSystem sys = noisy_system({{0.0, 0.3, 0, {}}, {0.0, -0.2, 2, {}}});
  const EnsembleSummary zero = run_ensemble(sys, short_run(), Eigen::VectorXd::Zero(sys.n()), 8, 5);
  CHECK(zero.sup_energy.mean == 0.0);

  const Eigen::VectorXd c0 = low_modes(sys.n(), 0.02);
  const EnsembleSummary a = run_ensemble(sys, short_run(), c0, 16, 5);
  const EnsembleSummary b = run_ensemble(sys, short_run(), 2.0 * c0, 16, 5);
  const double ratio = std::sqrt(b.sup_energy.mean / a.sup_energy.mean);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("ensemble results do not depend on the thread count") {
  const GalerkinSystem sys = noisy_system({{0.1, 0.1, 0, {}}}, true, 0.3);
  const Eigen::VectorXd c0 = low_modes(sys.n(), 0.3);
  setenv("GRADE2_THREADS", "1", 1);
  const EnsembleSummary one = run_ensemble(sys, short_run(), c0, 12, 9);
  setenv("GRADE2_THREADS", "4", 1);
  const EnsembleSummary four = run_ensemble(sys, short_run(), c0, 12, 9);
  unsetenv("GRADE2_THREADS");
  CHECK(one.sup_energy.mean == four.sup_energy.mean);
  CHECK(one.martingale.mean == four.martingale.mean);
  CHECK(one.lp1.c_obs == four.lp1.c_obs);
}

TEST_CASE("stability: zero perturbation, weight and scaling") {
  const GalerkinSystem sys = noisy_system({{0.1, 0.2, 0, {}}}, true, 0.2);
  const Eigen::VectorXd c0 = low_modes(sys.n(), 0.3);
  const Eigen::VectorXd d = unit_w_direction(sys, 7);
  CHECK(d.norm() + std::sqrt(d.dot(sys.grams.projected_upsilon * d)) == doctest::Approx(1.0));

  StabilityOptions o;
  o.eps = {0.0, 1e-2, 5e-3, 2.5e-3};
  o.paths = 8;
  const StabilityReport r = stability_experiment(sys, short_run(), c0, o);
  CHECK(r.rows[0].weighted.mean == 0.0);
  CHECK(r.xi_monotone);
  CHECK(r.slope == doctest::Approx(2.0).epsilon(0.1));
  const double quarter = r.rows[2].weighted.mean / r.rows[3].weighted.mean;
  CHECK(quarter > 3.2);
  CHECK(quarter < 5.0);
  // Larger C3 only lowers the weight.
  StabilityOptions heavy = o;
  heavy.C3 = 10.0;
  const StabilityReport h = stability_experiment(sys, short_run(), c0, heavy);
  CHECK(h.rows[1].weighted.mean <= r.rows[1].weighted.mean);
  StabilityOptions bad = o;
  bad.eps = {-1.0};
  CHECK_THROWS_AS(stability_experiment(sys, short_run(), c0, bad), ConfigError);
}

TEST_CASE("Galerkin self-convergence") {
  const GalerkinSystem sys = noisy_system({});
  const Eigen::VectorXd c0 = low_modes(sys.n(), 1.0);
  const ConvergenceReport r = convergence_study(sys, short_run(0.5, 256), c0, {4, 8, 16}, 1, 1);
  REQUIRE(r.rows.size() == 3);
  CHECK(!r.stochastic);
  CHECK(r.rows[0].difference.mean > r.rows[1].difference.mean);
  CHECK(r.rows[1].difference.mean > r.rows[2].difference.mean);

  const GalerkinSystem noisy = noisy_system({{0.1, 0.0, 0, {}}});
  const ConvergenceReport s = convergence_study(noisy, short_run(0.25, 128), c0, {4, 8}, 6, 3);
  CHECK(s.stochastic);
  CHECK(s.rows[0].difference.mean > s.rows[1].difference.mean - s.rows[1].difference.std_error);

  CHECK_THROWS_AS(convergence_study(sys, short_run(), c0, {8, 4}, 1, 1), ConfigError);
  CHECK_THROWS_AS(convergence_study(sys, short_run(), c0, {8, 32}, 1, 1), ConfigError);
}

TEST_CASE("identity verification pass") {
  const GalerkinSystem sys = noisy_system({{0.1, 0.2, 0, {}}, {0.05, 0.0, 5, {}}}, true, 0.3);
  const Eigen::VectorXd c0 = low_modes(sys.n(), 0.3);
  VerifyOptions o;
  o.samples = 20;
  o.ito_states = 5;
  const VerificationReport ok = verify_identities(sys, short_run(), c0, o);
  for (const IdentityCheck& c : ok.checks) {
    INFO(c.name << " residual " << c.residual);
    CHECK(c.passed);
  }
  CHECK(ok.checks.size() >= 12);

  VerifyOptions tamper = o;
  tamper.gamma_tamper = 0.5;
  const VerificationReport bad = verify_identities(sys, short_run(), c0, tamper);
  CHECK(!bad.all_passed());
  for (const IdentityCheck& c : bad.checks) CHECK(c.passed == (c.name != "curl_trace"));

  const GalerkinSystem quiet = noisy_system({});
  VerifyOptions zero = o;
  zero.field_scale = 0.0;
  const VerificationReport z = verify_identities(quiet, short_run(), Eigen::VectorXd::Zero(quiet.n()), zero);
  for (const IdentityCheck& c : z.checks) {
    INFO(c.name);
    if (c.name != "enstrophy_gram") CHECK(c.residual == 0.0);
  }
}
