#include "grade2/spaces.hpp"

#include "grade2/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grade2 {

void PhysicalParams::validate() const {
  auto need_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("physics.") + name + " must be a finite number > 0, got " + std::to_string(v));
  };
  need_positive(nu, "nu");
  need_positive(alpha, "alpha");
  need_positive(gamma, "gamma");
}

VectorPolynomial VectorPolynomial::from_nodal(const DiskGrid& grid, const VectorField& y) {
  return {PolarPolynomial::from_nodal(grid, y.x1), PolarPolynomial::from_nodal(grid, y.x2)};
}

VectorPolynomial VectorPolynomial::from_stream(const PolarPolynomial& psi) {
  return {-1.0 * psi.dx2(), psi.dx1()};
}

VectorPolynomial operator+(VectorPolynomial a, const VectorPolynomial& b) {
  a.x1 += b.x1;
  a.x2 += b.x2;
  return a;
}

VectorPolynomial operator*(double s, VectorPolynomial a) {
  a.x1 *= s;
  a.x2 *= s;
  return a;
}

VectorPolynomial upsilon(const VectorPolynomial& y, const PhysicalParams& p) {
  return y + (-p.alpha) * y.laplacian();
}

VectorField upsilon(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p) {
  return y - p.alpha * vector_laplacian(grid, y);
}

Deformation deformation(const DiskGrid& grid, const VectorPolynomial& y) {
  const VectorPolynomial g1 = y.dx1();
  const VectorPolynomial g2 = y.dx2();
  return {g1.x1.sample(grid), g2.x2.sample(grid), 0.5 * (g1.x2.sample(grid) + g2.x1.sample(grid))};
}

Deformation deformation(const DiskGrid& grid, const VectorField& y) {
  return deformation(grid, VectorPolynomial::from_nodal(grid, y));
}

double deformation_dot(const DiskGrid& grid, const Deformation& a, const Deformation& b) {
  return dot(grid, a.d11, b.d11) + dot(grid, a.d22, b.d22) + 2.0 * dot(grid, a.d12, b.d12);
}

double inner_V(const DiskGrid& grid, const VectorField& y, const VectorField& z, const PhysicalParams& p) {
  return dot(grid, y, z) + 2.0 * p.alpha * deformation_dot(grid, deformation(grid, y), deformation(grid, z)) +
         p.alpha * p.gamma * boundary_dot(grid, y, z);
}

double inner_Wtilde(const DiskGrid& grid, const VectorField& y, const VectorField& z, const PhysicalParams& p) {
  const ScalarField cy = upsilon(VectorPolynomial::from_nodal(grid, y), p).curl().sample(grid);
  const ScalarField cz = upsilon(VectorPolynomial::from_nodal(grid, z), p).curl().sample(grid);
  return dot(grid, cy, cz) + inner_V(grid, y, z, p);
}

VectorField helmholtz_project(const DiskGrid& grid, const VectorField& u) {
  const VectorPolynomial up = VectorPolynomial::from_nodal(grid, u);
  const ScalarField div = up.divergence().sample(grid);
  const ScalarField un(grid.cos_theta().values.cwiseProduct(u.x1.values) +
                       grid.sin_theta().values.cwiseProduct(u.x2.values));
  const Eigen::MatrixXd div_hat = grid.angular_forward(div);
  const Eigen::MatrixXd un_hat = grid.angular_forward(un);

  const int nr = grid.n_radial();
  const int L = grid.n_angular();
  const Eigen::VectorXd& r = grid.radial_nodes();
  const Eigen::VectorXd inv_r = r.cwiseInverse();
  Eigen::MatrixXd phi_hat = Eigen::MatrixXd::Zero(nr, L);

  for (int m = 0; m <= grid.n_angular_modes(); ++m) {
    const int parity = (m % 2 == 0) ? 1 : -1;
    const Eigen::MatrixXd D1 = grid.radial_d1(parity);
    const Eigen::MatrixXd D2 = grid.radial_d2(parity);
    Eigen::MatrixXd A = D2 + inv_r.asDiagonal() * D1;
    A.diagonal() -= double(m) * m * inv_r.cwiseAbs2();
    A.row(nr - 1) = D1.row(nr - 1);

    std::vector<int> slots = m == 0 ? std::vector<int>{0} : std::vector<int>{2 * m - 1, 2 * m};
    if (m == 0) {
      Eigen::MatrixXd Ag(nr + 1, nr);
      Ag.topRows(nr) = A;
      Ag.row(nr).setZero();
      Ag(nr, nr - 1) = 1.0;
      const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Ag);
      Eigen::VectorXd rhs(nr + 1);
      rhs.head(nr) = div_hat.col(0);
      rhs[nr - 1] = un_hat(nr - 1, 0);
      rhs[nr] = 0.0;
      phi_hat.col(0) = qr.solve(rhs);
    } else {
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
      for (int s : slots) {
        Eigen::VectorXd rhs = div_hat.col(s);
        rhs[nr - 1] = un_hat(nr - 1, s);
        phi_hat.col(s) = lu.solve(rhs);
      }
    }
  }
  const PolarPolynomial phi = PolarPolynomial::from_nodal(grid, grid.angular_inverse(phi_hat));
  return {u.x1 - phi.dx1().sample(grid), u.x2 - phi.dx2().sample(grid)};
}

std::pair<double, double> navier_residuals(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p) {
  const Eigen::VectorXd y1 = grid.boundary_values(y.x1);
  const Eigen::VectorXd y2 = grid.boundary_values(y.x2);
  const Eigen::VectorXd n1 = grid.normal_x1();
  const Eigen::VectorXd n2 = grid.normal_x2();
  const Eigen::VectorXd yn = y1.cwiseProduct(n1) + y2.cwiseProduct(n2);
  const Eigen::VectorXd yt = y2.cwiseProduct(n1) - y1.cwiseProduct(n2);
  const Eigen::VectorXd c = grid.boundary_values(VectorPolynomial::from_nodal(grid, y).curl().sample(grid));
  const Eigen::VectorXd res = c - (2.0 * grid.curvature() - p.gamma) * yt;
  return {yn.cwiseAbs().maxCoeff(), res.cwiseAbs().maxCoeff()};
}

double sobolev_norm(const DiskGrid& grid, const VectorPolynomial& y, int order) {
  double total = 0.0;
  for (const PolarPolynomial* comp : {&y.x1, &y.x2}) {
    // row b holds d/dx2^b, advanced along d/dx1 inside the loop
    std::vector<PolarPolynomial> column{*comp};
    for (int b = 1; b <= order; ++b) column.push_back(column.back().dx2());
    for (int b = 0; b <= order; ++b) {
      PolarPolynomial d = column[b];
      for (int a = 0; a + b <= order; ++a) {
        const ScalarField s = d.sample(grid);
        total += dot(grid, s, s);
        if (a + b < order) d = d.dx1();
      }
    }
  }
  return std::sqrt(std::max(total, 0.0));
}

NormReport norms(const DiskGrid& grid, const VectorField& y, const PhysicalParams& p) {
  const VectorPolynomial yp = VectorPolynomial::from_nodal(grid, y);
  const VectorPolynomial vp = upsilon(yp, p);
  NormReport out;
  out.l2 = std::sqrt(dot(grid, y, y));
  const Deformation d = deformation(grid, yp);
  const double v2 = out.l2 * out.l2 + 2.0 * p.alpha * deformation_dot(grid, d, d) +
                    p.alpha * p.gamma * boundary_dot(grid, y, y);
  out.V = std::sqrt(std::max(v2, 0.0));
  const ScalarField c = vp.curl().sample(grid);
  out.Wtilde = std::sqrt(std::max(v2 + dot(grid, c, c), 0.0));
  const VectorField pv = helmholtz_project(grid, vp.sample(grid));
  out.W = out.V + std::sqrt(dot(grid, pv, pv));
  out.H1 = sobolev_norm(grid, yp, 1);
  out.H2 = sobolev_norm(grid, yp, 2);
  out.H3 = sobolev_norm(grid, yp, 3);
  return out;
}

ObservedConstants observed_constants(const DiskGrid& grid, const PhysicalParams& p,
                                     const std::vector<VectorField>& samples) {
  ObservedConstants out;
  auto update = [](double& slot, double lhs, double rhs) {
    if (rhs > 0.0) slot = std::max(slot, lhs / rhs);
  };
  for (const VectorField& y : samples) {
    const VectorPolynomial yp = VectorPolynomial::from_nodal(grid, y);
    const double l2 = std::sqrt(dot(grid, y, y));
    const Deformation d = deformation(grid, yp);
    const double h1 = sobolev_norm(grid, yp, 1);
    const double h2 = sobolev_norm(grid, yp, 2);
    const double h3 = sobolev_norm(grid, yp, 3);
    const VectorPolynomial vp = upsilon(yp, p);
    const VectorField v = vp.sample(grid);
    const VectorField pv = helmholtz_project(grid, v);
    const VectorField gap = v - pv;
    const double pv_l2 = std::sqrt(dot(grid, pv, pv));
    const ScalarField c = vp.curl().sample(grid);
    update(out.korn, h1, std::sqrt(deformation_dot(grid, d, d)) + l2);
    update(out.sigma_l2, std::sqrt(dot(grid, gap, gap)), h1);
    update(out.sigma_h1, sobolev_norm(grid, VectorPolynomial::from_nodal(grid, gap), 1), h2);
    update(out.h2_by_projection, h2, pv_l2 + h1);
    update(out.h3_by_curl, h3, std::sqrt(dot(grid, c, c)) + h1);
  }
  return out;
}

}  // namespace grade2
