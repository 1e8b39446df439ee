#pragma once

// Monte Carlo ensembles for the a priori estimates, paired-path stability
// runs, Galerkin self-convergence and the identity verification pass.

#include "grade2/sde.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace grade2 {

/// Worker count: GRADE2_THREADS if set and positive, else the hardware count.
int worker_count();

/// Runs fn(0..count-1) on up to worker_count() threads.  The first exception
/// by index is rethrown after all workers finish.
void parallel_for(int count, const std::function<void(int)>& fn);

/// Sum that does not depend on the order of `values`: sorted, then pairwise.
double stable_sum(std::vector<double> values);

struct Estimate {
  double mean = 0;
  double std_error = 0;  // sample standard deviation / sqrt(count)
  int count = 0;
};
Estimate estimate(const std::vector<double>& values);

struct InequalityProbe {
  double lhs = 0;
  double rhs = 0;
  double c_obs = 0;  // lhs / rhs
};

struct EnsembleSummary {
  int paths = 0;
  int completed = 0;
  int blown_up = 0;
  double p = 4;
  Estimate sup_energy;          // E sup |Y|_V^2
  Estimate dissipation;         // E int (4 nu |DY|^2 + 2 nu gamma |Y|_Gamma^2)
  Estimate sup_enstrophy;       // E sup |curl v(Y)|^2
  Estimate sup_v_p;             // E sup |Y|_V^p
  Estimate enstrophy_integral;  // E int |curl v(Y)|^2
  Estimate energy_integral;     // E int |Y|_V^2
  Estimate martingale;          // terminal accumulated martingale term
  Estimate energy_residual;
  Estimate enstrophy_residual;
  InequalityProbe ineq1, ineq222, lp1;
  double fraction_tau_h3 = 0;
  double fraction_tau_v = 0;
};

/// Paths use WienerStream(base_seed, i).  Blown-up paths are counted and left
/// out of the estimates; throws EnsembleError if none completes and
/// ConfigError if paths < 2.  `records`, when given, receives every path.
EnsembleSummary run_ensemble(const GalerkinSystem& sys, const SimulationSettings& s, const Eigen::VectorXd& c0,
                             int paths, std::uint64_t base_seed, std::vector<TrajectoryRecord>* records = nullptr);

struct StabilityOptions {
  std::vector<double> eps{1e-2, 5e-3, 2.5e-3};
  int paths = 200;
  std::uint64_t base_seed = 1;
  std::uint64_t direction_seed = 7;
  double C3 = 1.0;
  // Optional extra decay exp(-C2 t - 2 C1 int |Y1|_W~); zero by default.
  double C1 = 0.0;
  double C2 = 0.0;
};

struct StabilityRow {
  double eps = 0;
  Estimate weighted;  // sup_t xi |Y1 - Y2|_W^2
  Estimate terminal;  // xi(T) |Y1(T) - Y2(T)|_W^2
  int blown_up = 0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double slope = 0;  // least squares of log mean against log eps over eps > 0
  double terminal_slope = 0;
  double C3 = 0, C1 = 0, C2 = 0;
  bool xi_monotone = true;  // xi(0) = 1 and nonincreasing on every path
  Eigen::VectorXd direction;  // delta, unit W norm
};

/// Unit W-norm trial direction drawn from the seed.
Eigen::VectorXd unit_w_direction(const GalerkinSystem& sys, std::uint64_t seed);

StabilityReport stability_experiment(const GalerkinSystem& sys, const SimulationSettings& s,
                                     const Eigen::VectorXd& c0, const StabilityOptions& opts);

struct ConvergenceRow {
  int n = 0;
  Estimate difference;  // |Y_n - Y_2n| in L^2(0, T; V)
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  int paths = 0;
  bool stochastic = false;
};

/// Truncations of `master` share initial data (projected) and noise paths.
/// Throws ConfigError unless n_list is ascending and 2 max(n_list) <= master.n().
ConvergenceReport convergence_study(const GalerkinSystem& master, const SimulationSettings& s,
                                    const Eigen::VectorXd& c0, const std::vector<int>& n_list, int paths,
                                    std::uint64_t base_seed);

struct IdentityCheck {
  std::string name;
  double residual = 0;  // largest relative residual over the samples
  double tolerance = 0;
  bool passed = false;
};

struct VerificationReport {
  std::vector<IdentityCheck> checks;
  bool all_passed() const;
};

struct VerifyOptions {
  int samples = 100;
  int ito_states = 20;
  std::uint64_t seed = 1;
  double field_scale = 1.0;   // 0 gives identically zero test fields
  double gamma_tamper = 0.0;  // added to gamma in the curl-trace residual only
};

/// Runs every identity on seeded random trial fields and on the states of one
/// simulated path.  Failures are report entries, never exceptions.
VerificationReport verify_identities(const GalerkinSystem& sys, const SimulationSettings& s,
                                     const Eigen::VectorXd& c0, const VerifyOptions& opts);

}  // namespace grade2
