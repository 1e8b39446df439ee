#include "grade2/geometry.hpp"

#include "grade2/errors.hpp"
#include "grade2/polar_polynomial.hpp"

#include <numbers>
#include <string>

namespace grade2 {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;

// Chebyshev-Gauss-Lobatto differentiation matrix on x_j = cos(pi j / N).
// Differences x_i - x_j use the product-of-sines form to avoid cancellation.
MatrixXd chebyshev_matrix(int N) {
  MatrixXd D = MatrixXd::Zero(N + 1, N + 1);
  auto c = [N](int i) { return (i == 0 || i == N) ? 2.0 : 1.0; };
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      if (i == j) continue;
      const double diff = 2.0 * std::sin(kPi * (i + j) / (2.0 * N)) * std::sin(kPi * (j - i) / (2.0 * N));
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = c(i) / c(j) * sign / diff;
    }
    D(i, i) = -D.row(i).sum();
  }
  return D;
}

// Second derivative by the Weideman-Reddy recursion, diagonal from row sums.
MatrixXd chebyshev_second(const MatrixXd& D, int N) {
  MatrixXd D2 = MatrixXd::Zero(N + 1, N + 1);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      if (i == j) continue;
      const double diff = 2.0 * std::sin(kPi * (i + j) / (2.0 * N)) * std::sin(kPi * (j - i) / (2.0 * N));
      D2(i, j) = 2.0 * D(i, j) * (D(i, i) - 1.0 / diff);
    }
    D2(i, i) = -D2.row(i).sum();
  }
  return D2;
}

double chebyshev_t(int k, double x) {
  // Three-term recurrence; stable on [-1, 1].
  if (k == 0) return 1.0;
  double t0 = 1.0, t1 = x;
  for (int n = 1; n < k; ++n) {
    const double t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

}  // namespace

DiskGrid::DiskGrid(int n_radial, int n_angular_modes)
    : n_radial_(n_radial), n_modes_(n_angular_modes), n_angular_(2 * n_angular_modes + 2) {
  const int N = 2 * n_radial_ - 1;
  // Positive half of the full grid, reordered so that r increases.
  auto cheb = [this](int j) { return n_radial_ - 1 - j; };

  r_.resize(n_radial_);
  for (int j = 0; j < n_radial_; ++j) r_[j] = std::sin(kPi * (N - 2.0 * cheb(j)) / (2.0 * N));
  r_[n_radial_ - 1] = 1.0;

  theta_.resize(n_angular_);
  for (int k = 0; k < n_angular_; ++k) theta_[k] = 2.0 * kPi * k / n_angular_;

  const MatrixXd D = chebyshev_matrix(N);
  const MatrixXd D2 = chebyshev_second(D, N);
  d1_pos_.resize(n_radial_, n_radial_);
  d1_neg_.resize(n_radial_, n_radial_);
  d2_pos_.resize(n_radial_, n_radial_);
  d2_neg_.resize(n_radial_, n_radial_);
  for (int i = 0; i < n_radial_; ++i) {
    for (int j = 0; j < n_radial_; ++j) {
      d1_pos_(i, j) = D(cheb(i), cheb(j));
      d1_neg_(i, j) = D(cheb(i), N - cheb(j));
      d2_pos_(i, j) = D2(cheb(i), cheb(j));
      d2_neg_(i, j) = D2(cheb(i), N - cheb(j));
    }
  }

  // Real DFT in slot layout and its inverse.
  const int L = n_angular_;
  dft_forward_ = MatrixXd::Zero(L, L);
  dft_inverse_ = MatrixXd::Zero(L, L);
  for (int k = 0; k < L; ++k) {
    dft_forward_(0, k) = 1.0 / L;
    dft_inverse_(k, 0) = 1.0;
    for (int m = 1; m <= n_modes_; ++m) {
      const double cm = std::cos(m * theta_[k]);
      const double sm = std::sin(m * theta_[k]);
      dft_forward_(2 * m - 1, k) = 2.0 * cm / L;
      dft_forward_(2 * m, k) = 2.0 * sm / L;
      dft_inverse_(k, 2 * m - 1) = cm;
      dft_inverse_(k, 2 * m) = sm;
    }
    const double alt = (k % 2 == 0) ? 1.0 : -1.0;
    dft_forward_(L - 1, k) = alt / L;
    dft_inverse_(k, L - 1) = alt;
  }
  MatrixXd spec_d1 = MatrixXd::Zero(L, L);
  MatrixXd spec_d2 = MatrixXd::Zero(L, L);
  for (int m = 1; m <= n_modes_; ++m) {
    spec_d1(2 * m, 2 * m - 1) = -m;
    spec_d1(2 * m - 1, 2 * m) = m;
    spec_d2(2 * m - 1, 2 * m - 1) = -m * m;
    spec_d2(2 * m, 2 * m) = -m * m;
  }
  spec_d2(L - 1, L - 1) = -double(n_modes_ + 1) * (n_modes_ + 1);
  dtheta_ = dft_inverse_ * spec_d1 * dft_forward_;
  dtheta2_ = dft_inverse_ * spec_d2 * dft_forward_;

  // Radial weights: exact for polynomials of degree < n_radial in s = r^2,
  // matched through Chebyshev moments in t = 2s - 1.
  MatrixXd vand(n_radial_, n_radial_);
  VectorXd moments(n_radial_);
  for (int k = 0; k < n_radial_; ++k) {
    moments[k] = (k % 2 == 0) ? 0.25 * 2.0 / (1.0 - double(k) * k) : 0.0;
    for (int j = 0; j < n_radial_; ++j) vand(k, j) = chebyshev_t(k, 2.0 * r_[j] * r_[j] - 1.0);
  }
  const VectorXd w_r = vand.partialPivLu().solve(moments);
  const double dtheta = 2.0 * kPi / L;

  const Eigen::Index n = size();
  w_domain_.resize(n);
  x1_ = ScalarField::zeros(n);
  x2_ = ScalarField::zeros(n);
  rr_ = ScalarField::zeros(n);
  cos_ = ScalarField::zeros(n);
  sin_ = ScalarField::zeros(n);
  for (int j = 0; j < n_radial_; ++j) {
    for (int k = 0; k < L; ++k) {
      const Eigen::Index i = index(j, k);
      w_domain_[i] = w_r[j] * dtheta;
      cos_[i] = std::cos(theta_[k]);
      sin_[i] = std::sin(theta_[k]);
      rr_[i] = r_[j];
      x1_[i] = r_[j] * cos_[i];
      x2_[i] = r_[j] * sin_[i];
    }
  }
  w_boundary_ = VectorXd::Constant(L, dtheta);

  cheb_even_matrix_.resize(n_radial_, n_radial_);
  cheb_odd_matrix_.resize(n_radial_, n_radial_);
  for (int j = 0; j < n_radial_; ++j) {
    for (int l = 0; l < n_radial_; ++l) {
      cheb_even_matrix_(j, l) = chebyshev_t(2 * l, r_[j]);
      cheb_odd_matrix_(j, l) = chebyshev_t(2 * l + 1, r_[j]);
    }
  }
  cheb_even_.compute(cheb_even_matrix_);
  cheb_odd_.compute(cheb_odd_matrix_);
}

DiskGrid build_grid(int n_radial, int n_angular_modes) {
  if (n_radial < 4)
    throw ConfigError("geometry.n_radial must be >= 4, got " + std::to_string(n_radial));
  if (n_angular_modes < 1)
    throw ConfigError("geometry.n_angular_modes must be >= 1, got " + std::to_string(n_angular_modes));
  return DiskGrid(n_radial, n_angular_modes);
}

namespace {

// Column k holds angular node k, column-major over rings: V(k, j).
using ConstRingMap = Eigen::Map<const MatrixXd>;
using RingMap = Eigen::Map<MatrixXd>;

void check_size(const DiskGrid& g, const ScalarField& f) {
  if (f.size() != g.size())
    throw ShapeError("field has " + std::to_string(f.size()) + " samples, grid has " +
                     std::to_string(g.size()));
}

MatrixXd half_turn(const MatrixXd& V) {
  const Eigen::Index L = V.rows();
  MatrixXd out(L, V.cols());
  out.topRows(L / 2) = V.bottomRows(L / 2);
  out.bottomRows(L / 2) = V.topRows(L / 2);
  return out;
}

}  // namespace

ScalarField DiskGrid::d_dr(const ScalarField& f) const {
  check_size(*this, f);
  ConstRingMap V(f.values.data(), n_angular_, n_radial_);
  ScalarField out = ScalarField::zeros(size());
  RingMap O(out.values.data(), n_angular_, n_radial_);
  O.noalias() = V * d1_pos_.transpose();
  O.noalias() += half_turn(V) * d1_neg_.transpose();
  return out;
}

ScalarField DiskGrid::d2_dr2(const ScalarField& f) const {
  check_size(*this, f);
  ConstRingMap V(f.values.data(), n_angular_, n_radial_);
  ScalarField out = ScalarField::zeros(size());
  RingMap O(out.values.data(), n_angular_, n_radial_);
  O.noalias() = V * d2_pos_.transpose();
  O.noalias() += half_turn(V) * d2_neg_.transpose();
  return out;
}

ScalarField DiskGrid::d_dtheta(const ScalarField& f) const {
  check_size(*this, f);
  ConstRingMap V(f.values.data(), n_angular_, n_radial_);
  ScalarField out = ScalarField::zeros(size());
  RingMap O(out.values.data(), n_angular_, n_radial_);
  O.noalias() = dtheta_ * V;
  return out;
}

ScalarField DiskGrid::d2_dtheta2(const ScalarField& f) const {
  check_size(*this, f);
  ConstRingMap V(f.values.data(), n_angular_, n_radial_);
  ScalarField out = ScalarField::zeros(size());
  RingMap O(out.values.data(), n_angular_, n_radial_);
  O.noalias() = dtheta2_ * V;
  return out;
}

Eigen::MatrixXd DiskGrid::angular_forward(const ScalarField& f) const {
  check_size(*this, f);
  ConstRingMap V(f.values.data(), n_angular_, n_radial_);
  return (dft_forward_ * V).transpose();
}

ScalarField DiskGrid::angular_inverse(const Eigen::MatrixXd& coeffs) const {
  if (coeffs.rows() != n_radial_ || coeffs.cols() != n_angular_)
    throw ShapeError("angular coefficient block has wrong shape");
  ScalarField out = ScalarField::zeros(size());
  RingMap O(out.values.data(), n_angular_, n_radial_);
  O.noalias() = dft_inverse_ * coeffs.transpose();
  return out;
}

Eigen::MatrixXd DiskGrid::radial_d1(int parity) const {
  return parity >= 0 ? MatrixXd(d1_pos_ + d1_neg_) : MatrixXd(d1_pos_ - d1_neg_);
}

Eigen::MatrixXd DiskGrid::radial_d2(int parity) const {
  return parity >= 0 ? MatrixXd(d2_pos_ + d2_neg_) : MatrixXd(d2_pos_ - d2_neg_);
}

SpectralField DiskGrid::to_spectral(const ScalarField& f) const {
  const MatrixXd A = angular_forward(f);
  SpectralField s{MatrixXd(n_radial_, n_angular_)};
  for (int slot = 0; slot < n_angular_; ++slot) {
    const bool odd = mode_of_slot(slot) % 2 == 1;
    s.coefficients.col(slot) = odd ? cheb_odd_.solve(A.col(slot)) : cheb_even_.solve(A.col(slot));
  }
  return s;
}

ScalarField DiskGrid::to_nodal(const SpectralField& s) const {
  if (s.coefficients.rows() != n_radial_ || s.coefficients.cols() != n_angular_)
    throw ShapeError("spectral block has wrong shape");
  MatrixXd A(n_radial_, n_angular_);
  for (int slot = 0; slot < n_angular_; ++slot) {
    const bool odd = mode_of_slot(slot) % 2 == 1;
    A.col(slot) = (odd ? cheb_odd_matrix_ : cheb_even_matrix_) * s.coefficients.col(slot);
  }
  return angular_inverse(A);
}

ScalarField differentiate(const DiskGrid& grid, const ScalarField& f, Derivative which) {
  const PolarPolynomial p = PolarPolynomial::from_nodal(grid, f);
  switch (which) {
    case Derivative::dx1:
      return p.dx1().sample(grid);
    case Derivative::dx2:
      return p.dx2().sample(grid);
    case Derivative::laplacian:
      return p.laplacian().sample(grid);
    case Derivative::bilaplacian:
      return p.laplacian().laplacian().sample(grid);
  }
  throw ShapeError("unknown derivative kind");
}

double integrate(const DiskGrid& grid, const ScalarField& f, Region region) {
  check_size(grid, f);
  if (region == Region::domain) return grid.domain_weights().dot(f.values);
  return grid.boundary_weights().dot(grid.boundary_values(f));
}

ScalarField curl_vector(const DiskGrid& grid, const VectorField& y) {
  return differentiate(grid, y.x2, Derivative::dx1) - differentiate(grid, y.x1, Derivative::dx2);
}

ScalarField divergence(const DiskGrid& grid, const VectorField& y) {
  return differentiate(grid, y.x1, Derivative::dx1) + differentiate(grid, y.x2, Derivative::dx2);
}

VectorField grad_perp(const DiskGrid& grid, const ScalarField& f) {
  return {-1.0 * differentiate(grid, f, Derivative::dx2), differentiate(grid, f, Derivative::dx1)};
}

VectorField gradient(const DiskGrid& grid, const ScalarField& f) {
  return {differentiate(grid, f, Derivative::dx1), differentiate(grid, f, Derivative::dx2)};
}

VectorField vector_laplacian(const DiskGrid& grid, const VectorField& y) {
  return {differentiate(grid, y.x1, Derivative::laplacian), differentiate(grid, y.x2, Derivative::laplacian)};
}

double dot(const DiskGrid& grid, const ScalarField& a, const ScalarField& b) {
  check_size(grid, a);
  check_size(grid, b);
  return grid.domain_weights().dot(a.values.cwiseProduct(b.values));
}

double dot(const DiskGrid& grid, const VectorField& a, const VectorField& b) {
  return dot(grid, a.x1, b.x1) + dot(grid, a.x2, b.x2);
}

double boundary_dot(const DiskGrid& grid, const VectorField& a, const VectorField& b) {
  const VectorXd p = grid.boundary_values(a.x1).cwiseProduct(grid.boundary_values(b.x1)) +
                     grid.boundary_values(a.x2).cwiseProduct(grid.boundary_values(b.x2));
  return grid.boundary_weights().dot(p);
}

}  // namespace grade2
