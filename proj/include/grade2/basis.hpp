#pragma once

// Navier-slip trial space and the V-orthonormal eigenbasis of the W~ vs V
// generalized eigenproblem.

#include "grade2/geometry.hpp"
#include "grade2/polar_polynomial.hpp"
#include "grade2/rng.hpp"
#include "grade2/spaces.hpp"

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

namespace grade2 {

/// Stream functions r^m T_k(2r^2 - 1) {cos, sin}(m theta), k < raw_count,
/// recombined through `null` so that psi = 0 and
/// laplacian(psi) = (2 - gamma) d(psi)/dn hold at r = 1.
struct TrialBlock {
  int m = 0;
  int raw_count = 0;
  Eigen::MatrixXd null;  // raw_count x (raw_count - 2), banded

  int size() const { return static_cast<int>(null.cols()); }
  int parities() const { return m == 0 ? 1 : 2; }
  /// Stream function with raw Chebyshev coefficients a; parity 0 = cos, 1 = sin.
  PolarPolynomial raw_stream(const Eigen::VectorXd& a, int parity) const;
  PolarPolynomial stream(const Eigen::VectorXd& x, int parity) const { return raw_stream(null * x, parity); }
};

/// (R(1), R'(1), R''(1)) for R(r) = r^m T_k(2r^2 - 1).
std::array<double, 3> raw_boundary_values(int m, int k);

/// Blocks for 0 <= m <= m_max and polynomial degree m + 2k <= d_max; modes
/// with fewer than three raw functions are skipped.
std::vector<TrialBlock> trial_blocks(double gamma, int m_max, int d_max);

/// Limits that keep the V and W~ Gram matrices exact under the grid quadrature.
int default_trial_mode_limit(const DiskGrid& grid);
int default_trial_degree_limit(const DiskGrid& grid);

/// Random stream function of the trial space: Gaussian trial coordinates damped
/// by 1/((1+k)^2 (1+m)).
PolarPolynomial random_trial_stream(const std::vector<TrialBlock>& blocks, PhiloxEngine& rng);

struct ModeLabel {
  int m = 0;
  int parity = 0;  // 0 cos, 1 sin
  int radial = 0;  // eigenvalue rank within the (m, parity) block
};

/// Nodal samples of the modes, one column per mode.
struct ModeSamples {
  Eigen::MatrixXd u1, u2;            // velocity
  Eigen::MatrixXd d11, d22, d12;     // deformation
  Eigen::MatrixXd curl;              // curl e_i
  Eigen::MatrixXd curl_upsilon;      // curl(e_i - alpha lap e_i)

  ModeSamples leading(int n) const;
};

struct GalerkinBasis {
  int n_modes = 0;
  PhysicalParams params;
  int n_radial = 0;
  int n_angular_modes = 0;
  int mode_limit = 0;
  int degree_limit = 0;
  Eigen::VectorXd eigenvalues;
  std::vector<ModeLabel> labels;
  std::vector<Eigen::VectorXd> trial_coordinates;  // per mode, in its block's null coordinates
  std::vector<PolarPolynomial> streams;
  std::vector<VectorField> modes;
  ModeSamples samples;
  Eigen::MatrixXd gram_V;
  Eigen::MatrixXd gram_Wtilde;

  /// First n modes; identical to a basis built with n_modes = n.
  GalerkinBasis truncated(int n) const;
};

struct BasisOptions {
  int mode_limit = -1;    // default_trial_mode_limit when negative
  int degree_limit = -1;  // default_trial_degree_limit when negative
};

/// Throws ConfigError if n_modes exceeds the trial dimension and
/// NumericalError if a V Gram block is not positive definite.
GalerkinBasis build_basis(const DiskGrid& grid, const PhysicalParams& p, int n_modes, BasisOptions opts = {});

/// Dimension of the trial space for the given limits.
int trial_dimension(const DiskGrid& grid, BasisOptions opts = {});

/// c_i = (y, e_i)_V.
Eigen::VectorXd project(const DiskGrid& grid, const VectorField& y, const GalerkinBasis& basis);
/// sum_i c_i e_i; throws ShapeError on a length mismatch.
VectorField reconstruct(const Eigen::VectorXd& c, const GalerkinBasis& basis);
PolarPolynomial reconstruct_stream(const Eigen::VectorXd& c, const GalerkinBasis& basis);

/// Quadratic forms of the basis used by the time stepper and its ledger.
struct BasisGrams {
  Eigen::MatrixXd mass;               // (e_i, e_j)
  Eigen::MatrixXd deformation;        // (De_i, De_j)
  Eigen::MatrixXd boundary;           // int_Gamma e_i . e_j
  Eigen::MatrixXd h3;                 // H^3 inner product
  Eigen::MatrixXd curl_curl_upsilon;  // (curl e_i, curl upsilon e_j)
  Eigen::MatrixXd curl_upsilon;       // (curl upsilon e_i, curl upsilon e_j)
  Eigen::MatrixXd projected_upsilon;  // (P upsilon e_i, P upsilon e_j)
};
BasisGrams compute_grams(const DiskGrid& grid, const GalerkinBasis& basis);

/// Binary cache: little-endian float64 payload plus a JSON sidecar holding
/// the key, the mode labels and an FNV-1a checksum of the payload.
void save_basis_cache(const std::filesystem::path& dir, const GalerkinBasis& basis);
std::optional<GalerkinBasis> load_basis_cache(const std::filesystem::path& dir, const DiskGrid& grid,
                                              const PhysicalParams& p, int n_modes, BasisOptions opts = {});

}  // namespace grade2
