#include "grade2/experiments.hpp"

#include "grade2/errors.hpp"
#include "grade2/nonlinear.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

namespace grade2 {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

int worker_count() {
  if (const char* env = std::getenv("GRADE2_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(std::min<long>(v, 1024));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::min(count, worker_count());
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

double pairwise(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return v[0];
  const std::size_t h = n / 2;
  return pairwise(v, h) + pairwise(v + h, n - h);
}

double relative(double diff, double scale) { return scale > 0 ? diff / scale : diff; }

}  // namespace

double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return pairwise(values.data(), values.size());
}

Estimate estimate(const std::vector<double>& values) {
  Estimate e;
  e.count = static_cast<int>(values.size());
  if (e.count == 0) return e;
  e.mean = stable_sum(values) / e.count;
  if (e.count > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - e.mean) * (values[i] - e.mean);
    e.std_error = std::sqrt(stable_sum(std::move(sq)) / (e.count - 1) / e.count);
  }
  return e;
}

EnsembleSummary run_ensemble(const GalerkinSystem& sys, const SimulationSettings& s, const Vector& c0, int paths,
                             std::uint64_t base_seed, std::vector<TrajectoryRecord>* records) {
  if (paths < 2) throw ConfigError("an ensemble needs at least 2 paths");
  s.validate();
  SimulationSettings lean = s;
  lean.keep_coefficients = records != nullptr && s.keep_coefficients;
  std::vector<TrajectoryRecord> runs(paths);
  parallel_for(paths, [&](int i) {
    runs[i] = simulate_path(sys, lean, c0, base_seed, static_cast<std::uint64_t>(i));
    if (!records) {
      runs[i].ledger.clear();
      runs[i].times.clear();
    }
  });

  EnsembleSummary out;
  out.paths = paths;
  out.p = s.p;
  std::vector<double> sup_e, diss, sup_z, sup_p, zint, eint, mart, eres, zres;
  int hit_h3 = 0, hit_v = 0;
  for (const TrajectoryRecord& r : runs) {
    if (r.tau_h3) ++hit_h3;
    if (r.tau_v) ++hit_v;
    if (r.blown_up) {
      ++out.blown_up;
      continue;
    }
    sup_e.push_back(r.sup_energy);
    diss.push_back(r.dissipation_integral);
    sup_z.push_back(r.sup_enstrophy);
    sup_p.push_back(r.sup_v_p);
    zint.push_back(r.enstrophy_integral);
    eint.push_back(r.energy_integral);
    mart.push_back(r.martingale_sum);
    eres.push_back(r.energy_residual_sum);
    zres.push_back(r.enstrophy_residual_sum);
  }
  out.completed = paths - out.blown_up;
  if (out.completed == 0) throw EnsembleError("every path of the ensemble blew up");
  out.fraction_tau_h3 = static_cast<double>(hit_h3) / paths;
  out.fraction_tau_v = static_cast<double>(hit_v) / paths;
  out.sup_energy = estimate(sup_e);
  out.dissipation = estimate(diss);
  out.sup_enstrophy = estimate(sup_z);
  out.sup_v_p = estimate(sup_p);
  out.enstrophy_integral = estimate(zint);
  out.energy_integral = estimate(eint);
  out.martingale = estimate(mart);
  out.energy_residual = estimate(eres);
  out.enstrophy_residual = estimate(zres);

  // The forcing is deterministic and autonomous, so its time integrals are T times a constant.
  const PhysicalParams& p = sys.params;
  const double T = s.T;
  const double u2 = sys.forcing.l2_norm * sys.forcing.l2_norm;
  const double curl2 = sys.forcing.curl_norm * sys.forcing.curl_norm;
  const double v0 = c0.squaredNorm();
  const double z0 = c0.dot(sys.grams.curl_upsilon * c0);
  auto probe = [](double lhs, double rhs) { return InequalityProbe{lhs, rhs, lhs / rhs}; };
  out.ineq1 = probe(0.5 * out.sup_energy.mean + out.dissipation.mean, 1 + v0 + T * u2);
  out.ineq222 = probe(0.5 * out.sup_enstrophy.mean + 2 * p.nu / p.alpha * out.enstrophy_integral.mean,
                      z0 + T * curl2 + T + out.energy_integral.mean);
  out.lp1 = probe(out.sup_v_p.mean, std::pow(v0, s.p / 2) + 1 + T * std::pow(sys.forcing.l2_norm, s.p));
  if (records) *records = std::move(runs);
  return out;
}

Vector unit_w_direction(const GalerkinSystem& sys, std::uint64_t seed) {
  PhiloxEngine rng(seed);
  Vector d = random_coefficients(sys.n(), rng);
  const double w = d.norm() + std::sqrt(std::max(0.0, d.dot(sys.grams.projected_upsilon * d)));
  return d / w;
}

namespace {

struct PairResult {
  double sup_weighted = 0;
  double terminal = 0;
  bool blown = false;
  bool xi_ok = true;
};

PairResult simulate_pair(const GalerkinSystem& sys, const SimulationSettings& s, const Stepper& stepper, Vector c1,
                         Vector c2, std::uint64_t seed, std::uint64_t path, const StabilityOptions& o) {
  const BasisGrams& g = sys.grams;
  const Vector& lambda = sys.basis.eigenvalues;
  auto h3 = [&](const Vector& c) { return std::sqrt(std::max(0.0, c.dot(g.h3 * c))); };
  auto wtilde = [&](const Vector& c) { return std::sqrt(c.dot(lambda.cwiseProduct(c))); };
  auto w2 = [&](const Vector& d) {
    const double w = d.norm() + std::sqrt(std::max(0.0, d.dot(g.projected_upsilon * d)));
    return w * w;
  };
  const int steps = s.steps();
  const int m = sys.noise.size();
  const double dt = s.dt, sqdt = std::sqrt(dt);
  const WienerStream wiener(seed, path);

  PairResult out;
  double h_prev = h3(c1) + h3(c2), wt_prev = wtilde(c1);
  double ih = 0, iw = 0, xi = 1.0;
  out.sup_weighted = xi * w2(c1 - c2);
  Vector dW(m);
  for (int j = 0; j < steps; ++j) {
    const double t = j * dt;
    for (int k = 0; k < m; ++k) dW[k] = sqdt * wiener.normal(static_cast<std::uint64_t>(j), static_cast<std::uint32_t>(k));
    try {
      c1 = stepper.step(c1, t, dW);
      c2 = stepper.step(c2, t, dW);
    } catch (const BlowUpError&) {
      out.blown = true;
      return out;
    }
    const double h = h3(c1) + h3(c2), wt = wtilde(c1);
    if (!std::isfinite(h) || h3(c1) > s.blowup_h3 || h3(c2) > s.blowup_h3) {
      out.blown = true;
      return out;
    }
    ih += 0.5 * dt * (h_prev + h);
    iw += 0.5 * dt * (wt_prev + wt);
    h_prev = h;
    wt_prev = wt;
    const double next = std::exp(-o.C3 * ih - o.C2 * (t + dt) - 2 * o.C1 * iw);
    if (next > xi) out.xi_ok = false;
    xi = next;
    if ((j + 1) % s.save_stride == 0 || j + 1 == steps) out.sup_weighted = std::max(out.sup_weighted, xi * w2(c1 - c2));
  }
  out.terminal = xi * w2(c1 - c2);
  return out;
}

// Least-squares slope of log y against log x over the positive pairs; NaN below two points.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    n += 1;
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  if (n < 2) return std::nan("");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

StabilityReport stability_experiment(const GalerkinSystem& sys, const SimulationSettings& s, const Vector& c0,
                                     const StabilityOptions& o) {
  s.validate();
  if (o.paths < 2) throw ConfigError("stability needs at least 2 path pairs");
  if (o.eps.empty()) throw ConfigError("stability needs at least one perturbation size");
  if (c0.size() != sys.n()) throw ShapeError("initial coefficients have the wrong length");
  for (double e : o.eps)
    if (!(e >= 0) || !std::isfinite(e)) throw ConfigError("perturbation sizes must be finite and nonnegative");
  if (o.C1 < 0 || o.C2 < 0 || o.C3 < 0) throw ConfigError("weight constants must be nonnegative");

  StabilityReport rep;
  rep.C1 = o.C1;
  rep.C2 = o.C2;
  rep.C3 = o.C3;
  rep.direction = unit_w_direction(sys, o.direction_seed);
  const Stepper stepper(sys, s.dt, s.scheme);
  std::vector<double> xs, sup_means, end_means;
  for (double e : o.eps) {
    std::vector<PairResult> res(o.paths);
    const Vector c2 = c0 + e * rep.direction;
    parallel_for(o.paths, [&](int i) {
      res[i] = simulate_pair(sys, s, stepper, c0, c2, o.base_seed, static_cast<std::uint64_t>(i), o);
    });
    StabilityRow row;
    row.eps = e;
    std::vector<double> sups, ends;
    for (const PairResult& r : res) {
      rep.xi_monotone = rep.xi_monotone && r.xi_ok;
      if (r.blown) {
        ++row.blown_up;
      } else {
        sups.push_back(r.sup_weighted);
        ends.push_back(r.terminal);
      }
    }
    if (sups.empty()) throw EnsembleError("every path pair blew up");
    row.weighted = estimate(sups);
    row.terminal = estimate(ends);
    xs.push_back(e);
    sup_means.push_back(row.weighted.mean);
    end_means.push_back(row.terminal.mean);
    rep.rows.push_back(row);
  }
  rep.slope = log_log_slope(xs, sup_means);
  rep.terminal_slope = log_log_slope(xs, end_means);
  return rep;
}

ConvergenceReport convergence_study(const GalerkinSystem& master, const SimulationSettings& s, const Vector& c0,
                                    const std::vector<int>& n_list, int paths, std::uint64_t base_seed) {
  s.validate();
  if (n_list.empty()) throw ConfigError("convergence study needs at least one n");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1])) throw ConfigError("n_list must be ascending");
  }
  if (2 * n_list.back() > master.n()) throw ConfigError("master basis must hold 2 max(n_list) modes");
  if (c0.size() != master.n()) throw ShapeError("initial coefficients have the wrong length");
  if (paths < 1) throw ConfigError("convergence study needs at least one path");

  std::vector<int> sizes;
  for (int n : n_list) {
    sizes.push_back(n);
    sizes.push_back(2 * n);
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  std::vector<GalerkinSystem> systems;
  for (int n : sizes) systems.push_back(master.truncated(n));
  auto system_index = [&](int n) { return std::lower_bound(sizes.begin(), sizes.end(), n) - sizes.begin(); };

  SimulationSettings dense = s;
  dense.save_stride = 1;
  dense.keep_coefficients = true;
  // diffs[row][path]; NaN marks a path lost to blow-up.
  std::vector<std::vector<double>> diffs(n_list.size(), std::vector<double>(paths));
  parallel_for(paths, [&](int path) {
    std::vector<TrajectoryRecord> runs;
    for (std::size_t k = 0; k < sizes.size(); ++k)
      runs.push_back(simulate_path(systems[k], dense, c0.head(sizes[k]), base_seed, static_cast<std::uint64_t>(path)));
    for (std::size_t r = 0; r < n_list.size(); ++r) {
      const TrajectoryRecord& a = runs[system_index(n_list[r])];
      const TrajectoryRecord& b = runs[system_index(2 * n_list[r])];
      if (a.blown_up || b.blown_up) {
        diffs[r][path] = std::nan("");
        continue;
      }
      const int n = n_list[r];
      double sum = 0;
      for (std::size_t j = 0; j + 1 < a.coefficients.size(); ++j) {
        const Vector& cb = b.coefficients[j];
        sum += (cb.head(n) - a.coefficients[j]).squaredNorm() + cb.tail(cb.size() - n).squaredNorm();
      }
      diffs[r][path] = std::sqrt(sum * s.dt);
    }
  });

  ConvergenceReport rep;
  rep.paths = paths;
  rep.stochastic = master.noise.size() > 0;
  for (std::size_t r = 0; r < n_list.size(); ++r) {
    std::vector<double> ok;
    for (double v : diffs[r])
      if (std::isfinite(v)) ok.push_back(v);
    if (ok.empty()) throw EnsembleError("every convergence path blew up");
    rep.rows.push_back({n_list[r], estimate(ok)});
  }
  return rep;
}

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
}

VerificationReport verify_identities(const GalerkinSystem& sys, const SimulationSettings& s, const Vector& c0,
                                     const VerifyOptions& o) {
  const DiskGrid& grid = *sys.grid;
  const PhysicalParams& p = sys.params;
  VerificationReport rep;
  auto record = [&](const std::string& name, double residual, double tol) {
    rep.checks.push_back({name, residual, tol, std::isfinite(residual) && residual <= tol});
  };
  auto guarded = [&](const std::string& name, double tol, const std::function<double()>& fn) {
    try {
      record(name, fn(), tol);
    } catch (const std::exception&) {
      record(name, std::nan(""), tol);
    }
  };

  // Random trial fields of moderate degree so triple products stay resolved.
  const int m_t = std::max(1, (grid.n_angular_modes() - 2) / 2);
  const int d_t = std::max(4, 2 * grid.n_radial() / 3);
  const auto blocks = trial_blocks(p.gamma, m_t, d_t);
  PhiloxEngine rng(o.seed);
  struct Sample {
    VectorPolynomial poly;
    VectorField field;
    double h1, h3;
  };
  auto draw = [&] {
    const VectorPolynomial y = o.field_scale * VectorPolynomial::from_stream(random_trial_stream(blocks, rng));
    return Sample{y, y.sample(grid), sobolev_norm(grid, y, 1), sobolev_norm(grid, y, 3)};
  };
  auto max_abs = [](const VectorField& v) {
    return std::max(v.x1.values.cwiseAbs().maxCoeff(), v.x2.values.cwiseAbs().maxCoeff());
  };
  std::vector<Sample> fields;
  for (int i = 0; i < o.samples; ++i) fields.push_back(draw());
  auto at = [&](int i) -> const Sample& { return fields[static_cast<std::size_t>(i) % fields.size()]; };

  guarded("curl_trace", 1e-7, [&] {
    PhysicalParams tampered = p;
    tampered.gamma += o.gamma_tamper;
    double worst = 0;
    for (const Sample& y : fields) {
      const auto [yn, res] = navier_residuals(grid, y.field, tampered);
      const double scale = max_abs(y.field) + curl_vector(grid, y.field).values.cwiseAbs().maxCoeff();
      worst = std::max(worst, relative(std::max(yn, res), scale));
    }
    return worst;
  });
  guarded("integration_by_parts", 1e-7, [&] {
    double worst = 0;
    for (int i = 0; i < o.samples; ++i) {
      const VectorField& y = at(i).field;
      const VectorField& z = at(i + 1).field;
      const double lhs = -dot(grid, vector_laplacian(grid, y), z);
      const Deformation dy = deformation(grid, y), dz = deformation(grid, z);
      const double bnd = p.gamma * boundary_dot(grid, y, z), vol = 2 * deformation_dot(grid, dy, dz);
      worst = std::max(worst, relative(std::abs(lhs - bnd - vol), std::abs(lhs) + std::abs(bnd) + std::abs(vol)));
    }
    return worst;
  });
  guarded("b_antisymmetry", 1e-7, [&] {
    double worst = 0;
    for (int i = 0; i < o.samples; ++i) {
      const Sample &f = at(i), &z = at(i + 1), &y = at(i + 2);
      const double a = trilinear_b(grid, f.field, z.field, y.field) + trilinear_b(grid, f.field, y.field, z.field);
      worst = std::max(worst, relative(std::abs(a), f.h1 * z.h1 * y.h1));
    }
    return worst;
  });
  guarded("dual_formula", 1e-7, [&] {
    double worst = 0;
    for (int i = 0; i < o.samples; ++i) {
      const Sample &y = at(i), &z = at(i + 1), &f = at(i + 2);
      const double d = curl_cross_pairing(grid, y.field, z.field, f.field, p) -
                       curl_cross_pairing_dual(grid, y.field, z.field, f.field, p);
      worst = std::max(worst, relative(std::abs(d), y.h3 * z.h1 * f.h3));
    }
    return worst;
  });
  guarded("curl_cross_antisymmetry", 1e-7, [&] {
    double worst = 0;
    for (int i = 0; i < o.samples; ++i) {
      const Sample &y = at(i), &z = at(i + 1);
      worst = std::max(worst, relative(std::abs(curl_cross_pairing(grid, y.field, z.field, z.field, p)),
                                       y.h3 * z.h1 * z.h1));
    }
    return worst;
  });
  guarded("energy_neutrality", 1e-7, [&] {
    double worst = 0;
    for (const Sample& y : fields)
      worst = std::max(worst, relative(std::abs(curl_cross_pairing(grid, y.field, y.field, y.field, p)),
                                       y.h3 * y.h1 * y.h1));
    return worst;
  });
  guarded("curl_of_nonlinearity", 1e-7, [&] {
    double worst = 0;
    for (const Sample& y : fields) {
      const ScalarField a = curl_of_cross(grid, y.field, p), b = advected_curl(grid, y.field, p);
      worst = std::max(worst, relative((a - b).values.cwiseAbs().maxCoeff(), b.values.cwiseAbs().maxCoeff()));
    }
    return worst;
  });
  guarded("advected_vorticity_orthogonality", 1e-7, [&] {
    double worst = 0;
    for (const Sample& y : fields) {
      const ScalarField b = advected_curl(grid, y.field, p);
      const ScalarField w = upsilon(y.poly, p).curl().sample(grid);
      worst = std::max(worst, relative(std::abs(dot(grid, b, w)), std::sqrt(dot(grid, b, b) * dot(grid, w, w))));
    }
    return worst;
  });

  const StokesSolver stokes(grid, p);
  guarded("stokes_round_trip", 1e-7, [&] {
    double worst = 0;
    for (int i = 0; i < std::min(o.samples, 50); ++i) {
      const Sample& y = at(i);
      const VectorField h = stokes.solve(upsilon(y.poly, p).sample(grid));
      worst = std::max(worst, relative(max_abs(h - y.field), max_abs(y.field)));
    }
    return worst;
  });
  guarded("stokes_energy", 1e-8, [&] {
    double worst = 0;
    const VectorField grad = grid.sample_vector([](double x, double y) { return std::pair{2 * x * y, x * x}; });
    for (int i = 0; i < std::min(o.samples, 50); ++i) {
      const VectorField f = at(i).field + o.field_scale * grad;
      const VectorField h = stokes.solve(f);
      const Deformation d = deformation(grid, h);
      const double lhs = dot(grid, h, h) + p.alpha * (2 * deformation_dot(grid, d, d) + p.gamma * boundary_dot(grid, h, h));
      const double rhs = dot(grid, f, h);
      worst = std::max(worst, relative(std::abs(lhs - rhs), std::abs(lhs) + std::abs(rhs)));
    }
    return worst;
  });
  guarded("enstrophy_gram", 1e-7, [&] {
    const Vector lm1 = (sys.basis.eigenvalues.array() - 1.0).matrix();
    const Matrix diag = lm1.asDiagonal();
    return relative((sys.grams.curl_upsilon - diag).cwiseAbs().maxCoeff(), lm1.cwiseAbs().maxCoeff());
  });

  PhiloxEngine state_rng(o.seed + 1);
  guarded("ito_correction", 1e-6, [&] {
    double worst = 0;
    for (int i = 0; i < o.ito_states; ++i) {
      const Vector c = o.field_scale * random_coefficients(sys.n(), state_rng);
      const auto [lhs, rhs] = ito_correction_sides(sys, stokes, c, 0.37 * i);
      worst = std::max(worst, relative(std::abs(lhs - rhs), std::max(lhs, rhs)));
    }
    return worst;
  });

  // Drift identity on the states of one simulated path, against field quadratures.
  guarded("energy_contraction", 1e-7, [&] {
    SimulationSettings run = s;
    run.keep_coefficients = true;
    const TrajectoryRecord r = simulate_path(sys, run, c0, o.seed, 0);
    const std::size_t states = r.coefficients.size();
    const std::size_t stride = std::max<std::size_t>(1, states / 32);
    double worst = 0;
    for (std::size_t j = 0; j < states; j += stride) {
      const Vector& c = r.coefficients[j];
      const VectorField y = reconstruct(c, sys.basis);
      const Deformation d = deformation(grid, y);
      const double t1 = -4 * p.nu * deformation_dot(grid, d, d);
      const double t2 = -2 * p.nu * p.gamma * boundary_dot(grid, y, y);
      // (U, Y) through the pairing vector; the field-side check of it lives in the unit tests.
      const double t3 = 2 * sys.forcing.l2_pairing.dot(c);
      const double lhs = 2 * c.dot(drift(sys, c, r.times[j]));
      worst = std::max(worst, relative(std::abs(lhs - t1 - t2 - t3), std::abs(t1) + std::abs(t2) + std::abs(t3)));
    }
    return worst;
  });
  return rep;
}

}  // namespace grade2
