#pragma once

// Galerkin coefficient SDE
//   dc_i = [-(A c)_i - (curl v(Y) x Y, e_i) + (U, e_i)] dt + sum_k (G^k(t, Y), e_i) dW^k,
// with Y = sum c_i e_i, v = upsilon, A_ij = 2 nu (De_i, De_j) + nu gamma int_Gamma e_i . e_j
// and affine noise G^k(t, Y) = s_k(t) (sigma_k e_{shape_k} + rho_k Y).

#include "grade2/basis.hpp"
#include "grade2/geometry.hpp"
#include "grade2/rng.hpp"
#include "grade2/spaces.hpp"
#include "grade2/stokes.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grade2 {

struct Envelope {
  enum class Kind { constant, cosine };
  Kind kind = Kind::constant;
  double frequency = 0.0;  // cosine: s(t) = cos(frequency t)
  double operator()(double t) const;
};

struct NoiseChannel {
  double sigma = 0.0;
  double rho = 0.0;
  int shape_mode = 0;
  Envelope envelope;
};

struct NoiseModel {
  std::vector<NoiseChannel> channels;
  /// Lipschitz / linear-growth constant for the channel-sum V norm.
  double lipschitz_K = 0.0;

  int size() const { return static_cast<int>(channels.size()); }
};

/// Validates shapes against n_modes, derives K and checks both noise bounds
/// on `checks` random coefficient pairs; throws ConfigError on violation.
NoiseModel make_noise(std::vector<NoiseChannel> channels, int n_modes, int checks = 100, std::uint64_t seed = 99);

struct ForcingSpec {
  enum class Kind { none, rotation, modes };
  Kind kind = Kind::none;
  double amplitude = 0.0;                         // rotation: U = amplitude (-x2, x1)
  std::vector<std::pair<int, double>> coefficients;  // modes: U = sum v e_i
};

struct Forcing {
  Eigen::VectorXd l2_pairing;    // (U, e_i)
  Eigen::VectorXd curl_pairing;  // (curl U, curl upsilon e_i)
  double l2_norm = 0.0;
  double curl_norm = 0.0;
  bool h_curl_ok = true;
};

Forcing make_forcing(const DiskGrid& grid, const GalerkinBasis& basis, const ForcingSpec& spec);

/// Everything the time stepper needs, in basis coordinates.
struct GalerkinSystem {
  const DiskGrid* grid = nullptr;
  GalerkinBasis basis;
  BasisGrams grams;
  PhysicalParams params;
  Forcing forcing;
  NoiseModel noise;
  bool nonlinear = true;
  Eigen::MatrixXd viscous;  // A

  int n() const { return basis.n_modes; }
  /// Leading n modes of every quantity; forcing pairings are truncated too.
  GalerkinSystem truncated(int n) const;
};

GalerkinSystem make_system(const DiskGrid& grid, GalerkinBasis basis, BasisGrams grams, Forcing forcing,
                           NoiseModel noise, bool nonlinear = true);

/// (curl v(Y) x Y, e_i).
Eigen::VectorXd nonlinear_term(const GalerkinSystem& sys, const Eigen::VectorXd& c);
Eigen::VectorXd drift(const GalerkinSystem& sys, const Eigen::VectorXd& c, double t);
/// Entry (i, k) = (G^k(t, Y), e_i).
Eigen::MatrixXd diffusion(const GalerkinSystem& sys, const Eigen::VectorXd& c, double t);

enum class Scheme { explicit_euler, semi_implicit };

class Stepper {
 public:
  /// Throws ConfigError unless dt > 0.
  Stepper(const GalerkinSystem& sys, double dt, Scheme scheme);
  /// One step from time t with Wiener increments dW (variance dt each);
  /// throws BlowUpError when the new state is not finite.
  Eigen::VectorXd step(const Eigen::VectorXd& c, double t, const Eigen::VectorXd& dW) const;
  double dt() const { return dt_; }

 private:
  const GalerkinSystem* sys_;
  double dt_;
  Scheme scheme_;
  Eigen::LLT<Eigen::MatrixXd> implicit_;
};

/// Per-step quantities of the energy and enstrophy budgets.
struct LedgerRow {
  double t = 0;
  double energy = 0;             // |Y|_V^2
  double deformation = 0;        // |DY|_2^2
  double boundary = 0;           // |Y|_{L2(Gamma)}^2
  double forcing_work = 0;       // (U, Y)
  double ito = 0;                // sum_ik (G^k, e_i)^2
  double martingale = 0;         // 2 sum_k (G^k, Y) dW^k over the following step
  double enstrophy = 0;          // |curl v(Y)|_2^2
  double enstrophy_source = 0;   // 2 (nu/alpha curl Y + curl U, curl v(Y))
  double enstrophy_ito = 0;      // sum_ik (lambda_i - 1) (G^k, e_i)^2
  double enstrophy_martingale = 0;  // 2 sum_k (curl G^k, curl v(Y)) dW^k
  double h3 = 0;                 // |Y|_H3
  double w = 0;                  // |Y|_W
  double martingale_sum = 0;     // accumulated martingale term up to t
  double energy_residual = 0;    // accumulated |energy residual| up to t
  double enstrophy_residual = 0; // accumulated |enstrophy residual| up to t
};

/// Fixed CSV column order of LedgerRow.
const std::vector<std::string>& ledger_columns();
std::vector<double> ledger_values(const LedgerRow& row);

struct SimulationSettings {
  double T = 1.0;
  double dt = 1.0 / 4096;
  int save_stride = 1;
  Scheme scheme = Scheme::explicit_euler;
  double stop_h3 = 1e3;    // N for the H^3 stopping time
  double stop_v = 1e3;     // N for the V stopping time
  double blowup_h3 = 1e6;  // paths above this H^3 norm terminate
  double p = 4.0;          // exponent of the L^p moment
  bool keep_coefficients = true;

  int steps() const;
  void validate() const;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> coefficients;
  std::vector<LedgerRow> ledger;
  std::optional<double> tau_h3, tau_v;
  bool blown_up = false;
  double end_time = 0;
  // Path functionals; sup over saved steps, integrals by left-point sums.
  double energy_residual_sum = 0;
  double enstrophy_residual_sum = 0;
  double martingale_sum = 0;
  double sup_energy = 0;
  double sup_enstrophy = 0;
  double sup_v_p = 0;
  double dissipation_integral = 0;  // int (4 nu |DY|^2 + 2 nu gamma |Y|_Gamma^2)
  double enstrophy_integral = 0;    // int |curl v(Y)|^2
  double energy_integral = 0;       // int |Y|_V^2
  double forcing_l2_integral = 0;   // int |U|_2^2
  double forcing_lp_integral = 0;   // int |U|_2^p
  double forcing_curl_integral = 0; // int |curl U|_2^2
  Eigen::VectorXd final_state;
};

LedgerRow ledger_row(const GalerkinSystem& sys, const Eigen::VectorXd& c, double t);

/// Integrates [0, T] with increments from WienerStream(seed, path).
TrajectoryRecord simulate_path(const GalerkinSystem& sys, const SimulationSettings& s, const Eigen::VectorXd& c0,
                               std::uint64_t seed, std::uint64_t path);

/// Both sides of sum_ik (G^k, e_i)^2 = sum_k |P_n G~^k|_V^2, G~^k the modified
/// Stokes lift of G^k.
std::pair<double, double> ito_correction_sides(const GalerkinSystem& sys, const StokesSolver& stokes,
                                               const Eigen::VectorXd& c, double t);

}  // namespace grade2
