#pragma once

// Polar spectral collocation of the unit disk.
//
// Radial nodes are the positive half of a Chebyshev-Gauss-Lobatto grid with
// an even number of points on [-1, 1], so r = 0 is never a node and r = 1
// always is.  Angular nodes are 2M+2 equispaced points.  Radial derivatives
// use the diameter trick: the value at (-r, theta) is read from
// (r, theta + pi), which keeps the radial collocation operators exact on
// polynomials in (x1, x2) without any pole treatment.

#include <Eigen/Dense>

#include <cmath>
#include <utility>

namespace grade2 {

struct ScalarField {
  Eigen::VectorXd values;

  ScalarField() = default;
  explicit ScalarField(Eigen::VectorXd v) : values(std::move(v)) {}
  static ScalarField zeros(Eigen::Index n) { return ScalarField(Eigen::VectorXd::Zero(n)); }
  static ScalarField constant(Eigen::Index n, double c) {
    return ScalarField(Eigen::VectorXd::Constant(n, c));
  }

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  double& operator[](Eigen::Index i) { return values[i]; }

  ScalarField& operator+=(const ScalarField& o) {
    values += o.values;
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    values -= o.values;
    return *this;
  }
  ScalarField& operator*=(double s) {
    values *= s;
    return *this;
  }
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator*(double s, ScalarField a) { return a *= s; }
inline ScalarField operator*(ScalarField a, double s) { return a *= s; }

/// Pointwise product.
inline ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  return ScalarField(a.values.cwiseProduct(b.values));
}

/// Cartesian components sampled on the polar grid.
struct VectorField {
  ScalarField x1;
  ScalarField x2;

  static VectorField zeros(Eigen::Index n) { return {ScalarField::zeros(n), ScalarField::zeros(n)}; }

  Eigen::Index size() const { return x1.size(); }
  bool all_finite() const { return x1.values.allFinite() && x2.values.allFinite(); }

  VectorField& operator+=(const VectorField& o) {
    x1 += o.x1;
    x2 += o.x2;
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    x1 -= o.x1;
    x2 -= o.x2;
    return *this;
  }
  VectorField& operator*=(double s) {
    x1 *= s;
    x2 *= s;
    return *this;
  }
};

inline VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
inline VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
inline VectorField operator*(double s, VectorField a) { return a *= s; }
inline VectorField operator*(VectorField a, double s) { return a *= s; }

enum class Derivative { dx1, dx2, laplacian, bilaplacian };
enum class Region { domain, boundary };

/// Mixed Fourier (angular) / parity-Chebyshev (radial) coefficients.
///
/// Column s is an angular slot: s = 0 is the mean, s = 2m-1 and s = 2m the
/// cos(m theta) and sin(m theta) parts for 1 <= m <= M, and the last column
/// the Nyquist cosine.  Row l multiplies T_{2l+q}(r) with q = m mod 2.
struct SpectralField {
  Eigen::MatrixXd coefficients;
};

class DiskGrid {
 public:
  int n_radial() const { return n_radial_; }
  int n_angular_modes() const { return n_modes_; }
  int n_angular() const { return n_angular_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(n_radial_) * n_angular_; }
  Eigen::Index index(int j, int k) const { return static_cast<Eigen::Index>(j) * n_angular_ + k; }

  /// Radial nodes, 0 < r_0 < ... < r_{n-1} = 1; ring n-1 is the boundary.
  const Eigen::VectorXd& radial_nodes() const { return r_; }
  const Eigen::VectorXd& angles() const { return theta_; }
  /// Node weights for the area integral, polar Jacobian included.
  const Eigen::VectorXd& domain_weights() const { return w_domain_; }
  /// Weights of the ring r = 1 (length n_angular).
  const Eigen::VectorXd& boundary_weights() const { return w_boundary_; }
  double curvature() const { return 1.0; }

  /// Angular wavenumber stored in a spectral slot.
  static int mode_of_slot(int slot) { return (slot + 1) / 2; }
  Eigen::Index boundary_offset() const { return size() - n_angular_; }

  const ScalarField& x1() const { return x1_; }
  const ScalarField& x2() const { return x2_; }
  const ScalarField& radius() const { return rr_; }
  const ScalarField& cos_theta() const { return cos_; }
  const ScalarField& sin_theta() const { return sin_; }

  template <class F>
  ScalarField sample(F&& f) const {
    ScalarField out = ScalarField::zeros(size());
    for (Eigen::Index i = 0; i < size(); ++i) out[i] = f(x1_[i], x2_[i]);
    return out;
  }

  template <class F>
  VectorField sample_vector(F&& f) const {
    VectorField out = VectorField::zeros(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      auto [a, b] = f(x1_[i], x2_[i]);
      out.x1[i] = a;
      out.x2[i] = b;
    }
    return out;
  }

  ScalarField d_dr(const ScalarField& f) const;
  ScalarField d2_dr2(const ScalarField& f) const;
  ScalarField d_dtheta(const ScalarField& f) const;
  ScalarField d2_dtheta2(const ScalarField& f) const;

  /// Real DFT of every ring: n_radial x n_angular slot layout of SpectralField.
  Eigen::MatrixXd angular_forward(const ScalarField& f) const;
  ScalarField angular_inverse(const Eigen::MatrixXd& coeffs) const;

  /// First/second radial derivative matrices acting on a profile of given
  /// parity (+1 even, -1 odd) sampled at the radial nodes.
  Eigen::MatrixXd radial_d1(int parity) const;
  Eigen::MatrixXd radial_d2(int parity) const;

  /// Values on the ring r = 1.
  Eigen::VectorXd boundary_values(const ScalarField& f) const { return f.values.tail(n_angular_); }

  /// Unit outward normal at the boundary nodes.
  Eigen::VectorXd normal_x1() const { return boundary_values(cos_); }
  Eigen::VectorXd normal_x2() const { return boundary_values(sin_); }

  SpectralField to_spectral(const ScalarField& f) const;
  ScalarField to_nodal(const SpectralField& s) const;

 private:
  DiskGrid(int n_radial, int n_angular_modes);
  friend DiskGrid build_grid(int n_radial, int n_angular_modes);

  int n_radial_;
  int n_modes_;
  int n_angular_;
  Eigen::VectorXd r_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd w_domain_;
  Eigen::VectorXd w_boundary_;
  // Full Chebyshev matrices restricted to rows with x > 0: columns for x > 0
  // (pos) and for the mirrored nodes x = -r_j (neg).
  Eigen::MatrixXd d1_pos_, d1_neg_, d2_pos_, d2_neg_;
  Eigen::MatrixXd dtheta_, dtheta2_;
  Eigen::MatrixXd dft_forward_, dft_inverse_;
  Eigen::PartialPivLU<Eigen::MatrixXd> cheb_even_, cheb_odd_;
  Eigen::MatrixXd cheb_even_matrix_, cheb_odd_matrix_;
  ScalarField x1_, x2_, rr_, cos_, sin_;
};

/// Throws ConfigError when n_radial < 4 or n_angular_modes < 1.
DiskGrid build_grid(int n_radial, int n_angular_modes);

/// Cartesian derivatives through the modal form of polar_polynomial.hpp;
/// exact on polynomial fields the grid resolves.
ScalarField differentiate(const DiskGrid& grid, const ScalarField& f, Derivative which);
double integrate(const DiskGrid& grid, const ScalarField& f, Region region);

ScalarField curl_vector(const DiskGrid& grid, const VectorField& y);
ScalarField divergence(const DiskGrid& grid, const VectorField& y);
/// (-d f/dx2, d f/dx1), so that curl grad_perp f = laplacian f.
VectorField grad_perp(const DiskGrid& grid, const ScalarField& f);
VectorField gradient(const DiskGrid& grid, const ScalarField& f);
VectorField vector_laplacian(const DiskGrid& grid, const VectorField& y);

/// Domain L2 pairing of two scalar / vector fields.
double dot(const DiskGrid& grid, const ScalarField& a, const ScalarField& b);
double dot(const DiskGrid& grid, const VectorField& a, const VectorField& b);
/// Line integral of a . b over r = 1.
double boundary_dot(const DiskGrid& grid, const VectorField& a, const VectorField& b);

}  // namespace grade2
