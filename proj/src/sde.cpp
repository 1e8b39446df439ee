#include "grade2/sde.hpp"

#include "grade2/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace grade2 {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

double Envelope::operator()(double t) const {
  switch (kind) {
    case Kind::constant:
      return 1.0;
    case Kind::cosine:
      return std::cos(frequency * t);
  }
  return 1.0;
}

NoiseModel make_noise(std::vector<NoiseChannel> channels, int n_modes, int checks, std::uint64_t seed) {
  NoiseModel out;
  for (const NoiseChannel& ch : channels) {
    if (ch.shape_mode < 0 || ch.shape_mode >= n_modes)
      throw ConfigError("noise shape mode " + std::to_string(ch.shape_mode) + " outside the basis of size " +
                        std::to_string(n_modes));
    if (!std::isfinite(ch.sigma) || !std::isfinite(ch.rho) || ch.sigma < 0)
      throw ConfigError("noise amplitudes must be finite with sigma >= 0");
    out.lipschitz_K += std::max(ch.sigma, std::abs(ch.rho));
  }
  out.channels = std::move(channels);

  // |s| <= 1 for both envelopes, so the bounds are checked at s = 1 in the
  // V norm of the coefficient vector, channel by channel.
  PhiloxEngine rng(seed);
  for (int t = 0; t < checks; ++t) {
    Vector y(n_modes), z(n_modes);
    for (int i = 0; i < n_modes; ++i) {
      y[i] = rng.normal();
      z[i] = rng.normal();
    }
    double growth = 0, lip = 0;
    for (const NoiseChannel& ch : out.channels) {
      Vector g = ch.rho * y;
      g[ch.shape_mode] += ch.sigma;
      growth += g.norm();
      lip += std::abs(ch.rho) * (y - z).norm();
    }
    if (growth > out.lipschitz_K * (1 + y.norm()) * (1 + 1e-12) ||
        lip > out.lipschitz_K * (y - z).norm() * (1 + 1e-12))
      throw ConfigError("noise violates its linear growth or Lipschitz bound");
  }
  return out;
}

Forcing make_forcing(const DiskGrid& grid, const GalerkinBasis& basis, const ForcingSpec& spec) {
  const int n = basis.n_modes;
  const ModeSamples& s = basis.samples;
  const Vector& w = grid.domain_weights();
  Forcing out;
  out.l2_pairing = Vector::Zero(n);
  out.curl_pairing = Vector::Zero(n);

  Vector u1 = Vector::Zero(grid.size()), u2 = u1, curl = u1;
  switch (spec.kind) {
    case ForcingSpec::Kind::none:
      return out;
    case ForcingSpec::Kind::rotation:
      u1 = -spec.amplitude * grid.x2().values;
      u2 = spec.amplitude * grid.x1().values;
      curl.setConstant(2 * spec.amplitude);
      break;
    case ForcingSpec::Kind::modes: {
      Vector c = Vector::Zero(n);
      for (auto [i, v] : spec.coefficients) {
        if (i < 0 || i >= n) throw ConfigError("forcing mode " + std::to_string(i) + " outside the basis");
        c[i] += v;
      }
      u1 = s.u1 * c;
      u2 = s.u2 * c;
      curl = s.curl * c;
      break;
    }
  }
  if (!u1.allFinite() || !u2.allFinite() || !curl.allFinite()) {
    out.h_curl_ok = false;
    throw ConfigError("forcing is not finite on the grid");
  }
  out.l2_pairing = s.u1.transpose() * w.cwiseProduct(u1) + s.u2.transpose() * w.cwiseProduct(u2);
  out.curl_pairing = s.curl_upsilon.transpose() * w.cwiseProduct(curl);
  out.l2_norm = std::sqrt(w.dot(u1.cwiseAbs2() + u2.cwiseAbs2()));
  out.curl_norm = std::sqrt(w.dot(curl.cwiseAbs2()));
  return out;
}

GalerkinSystem make_system(const DiskGrid& grid, GalerkinBasis basis, BasisGrams grams, Forcing forcing,
                           NoiseModel noise, bool nonlinear) {
  const int n = basis.n_modes;
  if (grams.mass.rows() != n || forcing.l2_pairing.size() != n)
    throw ShapeError("basis, Gram matrices and forcing disagree on the number of modes");
  for (const NoiseChannel& ch : noise.channels)
    if (ch.shape_mode >= n) throw ConfigError("noise shape mode outside the basis");
  GalerkinSystem sys;
  sys.grid = &grid;
  sys.params = basis.params;
  sys.viscous = sys.params.nu * (2 * grams.deformation + sys.params.gamma * grams.boundary);
  sys.basis = std::move(basis);
  sys.grams = std::move(grams);
  sys.forcing = std::move(forcing);
  sys.noise = std::move(noise);
  sys.nonlinear = nonlinear;
  return sys;
}

GalerkinSystem GalerkinSystem::truncated(int n) const {
  if (n < 1 || n > this->n()) throw ConfigError("cannot truncate to " + std::to_string(n) + " modes");
  auto lead = [n](const Matrix& m) { return Matrix(m.topLeftCorner(n, n)); };
  BasisGrams g{lead(grams.mass),         lead(grams.deformation),       lead(grams.boundary),
               lead(grams.h3),           lead(grams.curl_curl_upsilon), lead(grams.curl_upsilon),
               lead(grams.projected_upsilon)};
  Forcing f = forcing;
  f.l2_pairing.conservativeResize(n);
  f.curl_pairing.conservativeResize(n);
  return make_system(*grid, basis.truncated(n), std::move(g), std::move(f), noise, nonlinear);
}

Vector nonlinear_term(const GalerkinSystem& sys, const Vector& c) {
  const ModeSamples& s = sys.basis.samples;
  const Vector& w = sys.grid->domain_weights();
  const Vector wo = w.cwiseProduct(s.curl_upsilon * c);
  // int w (Y1 e2 - Y2 e1), w = curl upsilon(Y).
  return s.u2.transpose() * wo.cwiseProduct(s.u1 * c) - s.u1.transpose() * wo.cwiseProduct(s.u2 * c);
}

Vector drift(const GalerkinSystem& sys, const Vector& c, double) {
  Vector out = sys.forcing.l2_pairing - sys.viscous * c;
  if (sys.nonlinear) out -= nonlinear_term(sys, c);
  return out;
}

Matrix diffusion(const GalerkinSystem& sys, const Vector& c, double t) {
  const int m = sys.noise.size();
  Matrix out(sys.n(), m);
  bool any_rho = false;
  for (const NoiseChannel& ch : sys.noise.channels) any_rho = any_rho || ch.rho != 0;
  const Vector mc = any_rho ? Vector(sys.grams.mass * c) : Vector::Zero(sys.n());
  for (int k = 0; k < m; ++k) {
    const NoiseChannel& ch = sys.noise.channels[k];
    const double s = ch.envelope(t);
    out.col(k) = (s * ch.rho) * mc + (s * ch.sigma) * sys.grams.mass.col(ch.shape_mode);
  }
  return out;
}

Stepper::Stepper(const GalerkinSystem& sys, double dt, Scheme scheme) : sys_(&sys), dt_(dt), scheme_(scheme) {
  if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  if (scheme == Scheme::semi_implicit) {
    implicit_.compute(Matrix::Identity(sys.n(), sys.n()) + dt * sys.viscous);
    if (implicit_.info() != Eigen::Success) throw NumericalError("I + dt A is not positive definite");
  }
}

Vector Stepper::step(const Vector& c, double t, const Vector& dW) const {
  if (dW.size() != sys_->noise.size()) throw ShapeError("Wiener increment has the wrong number of channels");
  Vector out;
  if (scheme_ == Scheme::explicit_euler) {
    out = c + dt_ * drift(*sys_, c, t);
  } else {
    Vector rhs = c + dt_ * sys_->forcing.l2_pairing;
    if (sys_->nonlinear) rhs -= dt_ * nonlinear_term(*sys_, c);
    out = implicit_.solve(rhs);
  }
  if (dW.size() > 0) out += diffusion(*sys_, c, t) * dW;
  if (!out.allFinite()) throw BlowUpError(t + dt_, "non-finite Galerkin state");
  return out;
}

const std::vector<std::string>& ledger_columns() {
  static const std::vector<std::string> cols = {
      "t",          "energy",          "deformation",      "boundary",         "forcing_work",
      "ito",        "martingale",      "enstrophy",        "enstrophy_source", "enstrophy_ito",
      "enstrophy_martingale", "h3",    "w",                "martingale_sum",   "energy_residual",
      "enstrophy_residual"};
  return cols;
}

std::vector<double> ledger_values(const LedgerRow& r) {
  return {r.t,   r.energy,     r.deformation, r.boundary,         r.forcing_work,       r.ito,
          r.martingale, r.enstrophy, r.enstrophy_source, r.enstrophy_ito, r.enstrophy_martingale,
          r.h3,  r.w,          r.martingale_sum, r.energy_residual, r.enstrophy_residual};
}

LedgerRow ledger_row(const GalerkinSystem& sys, const Vector& c, double t) {
  const BasisGrams& g = sys.grams;
  const PhysicalParams& p = sys.params;
  LedgerRow r;
  r.t = t;
  r.energy = c.squaredNorm();
  r.deformation = c.dot(g.deformation * c);
  r.boundary = c.dot(g.boundary * c);
  r.forcing_work = sys.forcing.l2_pairing.dot(c);
  r.enstrophy = c.dot(g.curl_upsilon * c);
  r.enstrophy_source = 2 * (p.nu / p.alpha * c.dot(g.curl_curl_upsilon * c) + sys.forcing.curl_pairing.dot(c));
  if (sys.noise.size() > 0) {
    const Matrix b = diffusion(sys, c, t);
    const Vector rows = b.rowwise().squaredNorm();
    r.ito = rows.sum();
    r.enstrophy_ito = (sys.basis.eigenvalues.array() - 1.0).matrix().dot(rows);
  }
  r.h3 = std::sqrt(std::max(0.0, c.dot(g.h3 * c)));
  r.w = std::sqrt(r.energy) + std::sqrt(std::max(0.0, c.dot(g.projected_upsilon * c)));
  return r;
}

int SimulationSettings::steps() const { return static_cast<int>(std::llround(T / dt)); }

void SimulationSettings::validate() const {
  if (!(T > 0) || !(dt > 0) || !std::isfinite(T) || !std::isfinite(dt) || dt > T)
    throw ConfigError("need 0 < dt <= T");
  if (std::abs(steps() * dt - T) > 1e-9 * T) throw ConfigError("T must be an integer multiple of dt");
  if (save_stride < 1) throw ConfigError("save_stride must be at least 1");
  if (!(p >= 2)) throw ConfigError("moment exponent p must be at least 2");
  if (!(stop_h3 > 0) || !(stop_v > 0) || !(blowup_h3 > 0)) throw ConfigError("thresholds must be positive");
}

TrajectoryRecord simulate_path(const GalerkinSystem& sys, const SimulationSettings& s, const Vector& c0,
                               std::uint64_t seed, std::uint64_t path) {
  s.validate();
  if (c0.size() != sys.n()) throw ShapeError("initial coefficients have the wrong length");
  const PhysicalParams& p = sys.params;
  const int steps = s.steps();
  const int m = sys.noise.size();
  const double dt = s.dt, sqdt = std::sqrt(dt);
  const Stepper stepper(sys, dt, s.scheme);
  const WienerStream wiener(seed, path);
  const double u2 = sys.forcing.l2_norm * sys.forcing.l2_norm;
  const double up = std::pow(sys.forcing.l2_norm, s.p);
  const double curl2 = sys.forcing.curl_norm * sys.forcing.curl_norm;

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.path = path;
  Vector c = c0;
  LedgerRow row = ledger_row(sys, c, 0.0);

  auto crossings = [&](const LedgerRow& r) {
    if (!rec.tau_h3 && r.h3 >= s.stop_h3) rec.tau_h3 = r.t;
    if (!rec.tau_v && std::sqrt(r.energy) >= s.stop_v) rec.tau_v = r.t;
  };
  auto save = [&](const LedgerRow& r, const Vector& state) {
    rec.times.push_back(r.t);
    rec.ledger.push_back(r);
    if (s.keep_coefficients) rec.coefficients.push_back(state);
    rec.sup_energy = std::max(rec.sup_energy, r.energy);
    rec.sup_enstrophy = std::max(rec.sup_enstrophy, r.enstrophy);
    rec.sup_v_p = std::max(rec.sup_v_p, std::pow(r.energy, s.p / 2));
  };
  crossings(row);

  Vector dW(m);
  for (int j = 0; j < steps; ++j) {
    const double t = j * dt;
    for (int k = 0; k < m; ++k) dW[k] = sqdt * wiener.normal(static_cast<std::uint64_t>(j), static_cast<std::uint32_t>(k));
    if (m > 0) {
      const Matrix b = diffusion(sys, c, t);
      row.martingale = 2 * c.dot(b * dW);
      // (curl G^k, curl upsilon Y) = s_k (sigma_k (CC c)_shape + rho_k c.CC c).
      const Vector cc = sys.grams.curl_curl_upsilon * c;
      const double self = c.dot(cc);
      double em = 0;
      for (int k = 0; k < m; ++k) {
        const NoiseChannel& ch = sys.noise.channels[k];
        em += ch.envelope(t) * (ch.sigma * cc[ch.shape_mode] + ch.rho * self) * dW[k];
      }
      row.enstrophy_martingale = 2 * em;
    }
    if (j % s.save_stride == 0) save(row, c);

    Vector next;
    try {
      next = stepper.step(c, t, dW);
    } catch (const BlowUpError& e) {
      rec.blown_up = true;
      rec.end_time = e.time();
      break;
    }
    LedgerRow nrow = ledger_row(sys, next, t + dt);
    const double energy_law =
        (-4 * p.nu * row.deformation - 2 * p.nu * p.gamma * row.boundary + 2 * row.forcing_work + row.ito) * dt +
        row.martingale;
    const double enstrophy_law =
        (-2 * p.nu / p.alpha * row.enstrophy + row.enstrophy_source + row.enstrophy_ito) * dt +
        row.enstrophy_martingale;
    rec.energy_residual_sum += std::abs(nrow.energy - row.energy - energy_law);
    rec.enstrophy_residual_sum += std::abs(nrow.enstrophy - row.enstrophy - enstrophy_law);
    rec.martingale_sum += row.martingale;
    rec.dissipation_integral += (4 * p.nu * row.deformation + 2 * p.nu * p.gamma * row.boundary) * dt;
    rec.enstrophy_integral += row.enstrophy * dt;
    rec.energy_integral += row.energy * dt;
    rec.forcing_l2_integral += u2 * dt;
    rec.forcing_lp_integral += up * dt;
    rec.forcing_curl_integral += curl2 * dt;

    nrow.martingale_sum = rec.martingale_sum;
    nrow.energy_residual = rec.energy_residual_sum;
    nrow.enstrophy_residual = rec.enstrophy_residual_sum;
    c = std::move(next);
    row = nrow;
    crossings(row);
    rec.end_time = row.t;
    if (!std::isfinite(row.h3) || row.h3 > s.blowup_h3) {
      rec.blown_up = true;
      break;
    }
  }
  if (rec.times.empty() || rec.times.back() != row.t) save(row, c);
  rec.final_state = c;
  return rec;
}

std::pair<double, double> ito_correction_sides(const GalerkinSystem& sys, const StokesSolver& stokes,
                                               const Vector& c, double t) {
  const Matrix b = diffusion(sys, c, t);
  const double lhs = b.squaredNorm();
  const ModeSamples& s = sys.basis.samples;
  const Vector y1 = s.u1 * c, y2 = s.u2 * c;
  double rhs = 0;
  for (int k = 0; k < sys.noise.size(); ++k) {
    const NoiseChannel& ch = sys.noise.channels[k];
    const double sk = ch.envelope(t);
    VectorField g = VectorField::zeros(sys.grid->size());
    g.x1.values = sk * (ch.sigma * s.u1.col(ch.shape_mode) + ch.rho * y1);
    g.x2.values = sk * (ch.sigma * s.u2.col(ch.shape_mode) + ch.rho * y2);
    rhs += project(*sys.grid, stokes.solve(g), sys.basis).squaredNorm();
  }
  return {lhs, rhs};
}

}  // namespace grade2
