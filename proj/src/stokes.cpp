#include "grade2/stokes.hpp"

#include "grade2/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grade2 {

StokesSolver::StokesSolver(const DiskGrid& grid, const PhysicalParams& p) : grid_(&grid), params_(p) {
  p.validate();
  const int nr = grid.n_radial();
  const Eigen::VectorXd inv_r = grid.radial_nodes().cwiseInverse();
  const int b = nr - 1;  // boundary row
  for (int m = 0; m <= grid.n_angular_modes(); ++m) {
    const int parity = m % 2 == 0 ? 1 : -1;
    const Eigen::MatrixXd D1 = grid.radial_d1(parity);
    Eigen::MatrixXd L = grid.radial_d2(parity) + inv_r.asDiagonal() * D1;
    L.diagonal() -= double(m) * m * inv_r.cwiseAbs2();

    // Unknowns [phi; u] at the radial nodes.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * nr, 2 * nr);
    S.topLeftCorner(nr, nr) = L;
    S.topRightCorner(nr, nr) = -Eigen::MatrixXd::Identity(nr, nr);
    S.bottomRightCorner(nr, nr) = Eigen::MatrixXd::Identity(nr, nr) - p.alpha * L;
    S.row(b).setZero();
    S(b, b) = 1.0;
    S.row(nr + b).setZero();
    S(nr + b, nr + b) = 1.0;
    S.block(nr + b, 0, 1, nr) = -(2.0 * grid.curvature() - p.gamma) * D1.row(b);

    lu_.emplace_back(S);
    const double rcond = lu_.back().rcond();
    if (!(rcond > 1e-14))
      throw NumericalError("modified Stokes system of angular mode " + std::to_string(m) +
                           " is singular to working precision (rcond " + std::to_string(rcond) + ")");
  }
}

PolarPolynomial StokesSolver::solve_stream(const ScalarField& curl_f) const {
  const DiskGrid& g = *grid_;
  const int nr = g.n_radial();
  const Eigen::MatrixXd rhs_hat = g.angular_forward(curl_f);
  Eigen::MatrixXd phi_hat = Eigen::MatrixXd::Zero(nr, g.n_angular());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * nr);
  // The Nyquist slot carries no resolved content and stays zero.
  for (int s = 0; s + 1 < g.n_angular(); ++s) {
    const int m = DiskGrid::mode_of_slot(s);
    rhs.head(nr).setZero();
    rhs.tail(nr) = rhs_hat.col(s);
    rhs[2 * nr - 1] = 0.0;
    phi_hat.col(s) = lu_[m].solve(rhs).head(nr);
  }
  return PolarPolynomial::from_nodal(g, g.angular_inverse(phi_hat));
}

VectorField StokesSolver::solve(const VectorField& f) const {
  if (f.size() != grid_->size()) throw ShapeError("modified Stokes: field does not match the grid");
  const ScalarField curl_f = VectorPolynomial::from_nodal(*grid_, f).curl().sample(*grid_);
  return VectorPolynomial::from_stream(solve_stream(curl_f)).sample(*grid_);
}

VectorField solve_modified_stokes(const DiskGrid& grid, const VectorField& f, const PhysicalParams& p) {
  return StokesSolver(grid, p).solve(f);
}

StokesRegularity stokes_regularity(const DiskGrid& grid, const PhysicalParams& p,
                                   const std::vector<VectorField>& samples) {
  const StokesSolver solver(grid, p);
  StokesRegularity out;
  for (const VectorField& f : samples) {
    const VectorPolynomial fp = VectorPolynomial::from_nodal(grid, f);
    const VectorPolynomial hp = VectorPolynomial::from_stream(solver.solve_stream(fp.curl().sample(grid)));
    const double f0 = std::sqrt(dot(grid, f, f));
    const double f1 = sobolev_norm(grid, fp, 1);
    if (f0 > 0) out.h2_by_l2 = std::max(out.h2_by_l2, sobolev_norm(grid, hp, 2) / f0);
    if (f1 > 0) out.h3_by_h1 = std::max(out.h3_by_h1, sobolev_norm(grid, hp, 3) / f1);
  }
  return out;
}

}  // namespace grade2
