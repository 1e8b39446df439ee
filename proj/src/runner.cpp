#include "grade2/runner.hpp"

#include "grade2/errors.hpp"
#include "grade2/nonlinear.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace grade2 {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

Setup build_setup(const RunConfig& cfg, int n_modes) {
  cfg.validate();
  Setup s;
  s.grid = std::make_unique<DiskGrid>(build_grid(cfg.geometry.n_radial, cfg.geometry.n_angular_modes));
  const int n = std::max(n_modes, cfg.basis.n_modes);
  const BasisOptions opts{cfg.basis.mode_limit, cfg.basis.degree_limit};
  s.trial_dimension = trial_dimension(*s.grid, opts);
  std::optional<GalerkinBasis> basis;
  if (!cfg.basis.cache_dir.empty()) basis = load_basis_cache(cfg.basis.cache_dir, *s.grid, cfg.physics, n, opts);
  if (!basis) {
    basis = build_basis(*s.grid, cfg.physics, n, opts);
    if (!cfg.basis.cache_dir.empty()) save_basis_cache(cfg.basis.cache_dir, *basis);
  }
  basis->params = cfg.physics;  // nu is not part of the cache key
  BasisGrams grams = compute_grams(*s.grid, *basis);
  Forcing forcing = make_forcing(*s.grid, *basis, cfg.forcing);
  NoiseModel noise = make_noise(cfg.noise, n);
  s.c0 = Eigen::VectorXd::Zero(n);
  for (auto [i, v] : cfg.initial.modes) s.c0[i] += v;
  if (cfg.initial.random_norm > 0) {
    PhiloxEngine rng(cfg.initial.random_seed);
    const Eigen::VectorXd r = random_coefficients(n, rng);
    s.c0 += cfg.initial.random_norm / r.norm() * r;
  }
  s.system = make_system(*s.grid, std::move(*basis), std::move(grams), std::move(forcing), std::move(noise),
                         cfg.nonlinear);
  return s;
}

RunConfig apply_flags(RunConfig cfg, const RunFlags& flags) {
  if (flags.out) cfg.output.directory = flags.out->string();
  if (flags.seed) cfg.ensemble.base_seed = *flags.seed;
  if (flags.paths) {
    cfg.ensemble.paths = *flags.paths;
    cfg.stability.paths = *flags.paths;
    cfg.convergence.paths = *flags.paths;
  }
  cfg.validate();
  return cfg;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"std_error", e.std_error}, {"count", e.count}}; }

json probe_json(const InequalityProbe& p) { return {{"lhs", p.lhs}, {"rhs", p.rhs}, {"c_obs", p.c_obs}}; }

json optional_time(const std::optional<double>& t) { return t ? json(*t) : json(nullptr); }

std::string ledger_csv(const TrajectoryRecord& r) {
  Csv csv(ledger_columns());
  for (const LedgerRow& row : r.ledger) csv.row(ledger_values(row));
  return csv.str();
}

json trajectory_summary(const TrajectoryRecord& r) {
  return {{"seed", r.seed},
          {"path", r.path},
          {"blown_up", r.blown_up},
          {"end_time", r.end_time},
          {"tau_h3", optional_time(r.tau_h3)},
          {"tau_v", optional_time(r.tau_v)},
          {"sup_energy", r.sup_energy},
          {"sup_enstrophy", r.sup_enstrophy},
          {"dissipation_integral", r.dissipation_integral},
          {"martingale_sum", r.martingale_sum},
          {"energy_residual_sum", r.energy_residual_sum},
          {"enstrophy_residual_sum", r.enstrophy_residual_sum},
          {"final_energy", r.final_state.squaredNorm()}};
}

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  std::ostream& log;
  bool quiet;
  std::vector<std::string> outputs;
  json resolved = json::object();

  void write(const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    outputs.push_back(name);
  }
  void say(const std::string& line) {
    if (!quiet) log << line << "\n";
  }
};

void resolve(Context& ctx, const Setup& s) {
  ctx.resolved["n_modes"] = s.system.n();
  ctx.resolved["trial_dimension"] = s.trial_dimension;
  ctx.resolved["steps"] = ctx.cfg.settings().steps();
  ctx.resolved["lipschitz_K"] = s.system.noise.lipschitz_K;
  ctx.resolved["initial_energy"] = s.c0.squaredNorm();
}

int run_basis(Context& ctx) {
  const Setup s = build_setup(ctx.cfg);
  resolve(ctx, s);
  const GalerkinBasis& b = s.system.basis;
  Csv csv({"index", "m", "parity", "radial", "eigenvalue"});
  json labels = json::array();
  for (int i = 0; i < b.n_modes; ++i) {
    const ModeLabel& l = b.labels[i];
    csv.row({double(i), double(l.m), double(l.parity), double(l.radial), b.eigenvalues[i]});
    labels.push_back({{"m", l.m}, {"parity", l.parity == 0 ? "cos" : "sin"}, {"radial", l.radial}});
  }
  std::vector<double> ev(b.eigenvalues.data(), b.eigenvalues.data() + b.n_modes);
  ctx.write("eigenvalues.csv", csv.str());
  ctx.write("basis.json", json{{"n_modes", b.n_modes},
                               {"trial_dimension", s.trial_dimension},
                               {"mode_limit", b.mode_limit},
                               {"degree_limit", b.degree_limit},
                               {"eigenvalues", ev},
                               {"labels", labels}}
                              .dump(2));
  ctx.say("basis: " + std::to_string(b.n_modes) + " modes, lambda_1 = " + format_double(b.eigenvalues[0]));
  return 0;
}

int run_simulate(Context& ctx) {
  const Setup s = build_setup(ctx.cfg);
  resolve(ctx, s);
  const TrajectoryRecord r = simulate_path(s.system, ctx.cfg.settings(), s.c0, ctx.cfg.ensemble.base_seed, 0);
  ctx.write("trajectory.csv", ledger_csv(r));
  std::vector<std::string> header{"t"};
  for (int i = 0; i < s.system.n(); ++i) header.push_back("c" + std::to_string(i));
  Csv coef(header);
  for (std::size_t j = 0; j < r.coefficients.size(); ++j) {
    std::vector<double> row{r.times[j]};
    row.insert(row.end(), r.coefficients[j].data(), r.coefficients[j].data() + r.coefficients[j].size());
    coef.row(row);
  }
  ctx.write("coefficients.csv", coef.str());
  ctx.write("summary.json", trajectory_summary(r).dump(2));
  ctx.say("simulate: " + std::string(r.blown_up ? "blew up" : "completed") + " at t = " + format_double(r.end_time));
  return r.blown_up ? 1 : 0;
}

int run_ensemble_cmd(Context& ctx) {
  const Setup s = build_setup(ctx.cfg);
  resolve(ctx, s);
  SimulationSettings st = ctx.cfg.settings();
  st.keep_coefficients = false;
  std::vector<TrajectoryRecord> records;
  const EnsembleSummary e = run_ensemble(s.system, st, s.c0, ctx.cfg.ensemble.paths, ctx.cfg.ensemble.base_seed,
                                         &records);
  Csv paths({"path", "blown_up", "end_time", "sup_energy", "dissipation_integral", "sup_enstrophy",
             "martingale_sum", "energy_residual_sum", "enstrophy_residual_sum", "tau_h3", "tau_v"});
  const double none = std::nan("");
  for (const TrajectoryRecord& r : records) {
    paths.row({double(r.path), double(r.blown_up), r.end_time, r.sup_energy, r.dissipation_integral, r.sup_enstrophy,
               r.martingale_sum, r.energy_residual_sum, r.enstrophy_residual_sum, r.tau_h3.value_or(none),
               r.tau_v.value_or(none)});
  }
  ctx.write("paths.csv", paths.str());
  if (ctx.cfg.output.per_path_csv) {
    fs::create_directories(ctx.dir / "paths");
    for (const TrajectoryRecord& r : records) {
      char name[32];
      std::snprintf(name, sizeof name, "paths/path_%05llu.csv", static_cast<unsigned long long>(r.path));
      ctx.write(name, ledger_csv(r));
    }
  }
  json j = {{"paths", e.paths},
            {"completed", e.completed},
            {"blown_up", e.blown_up},
            {"p", e.p},
            {"sup_energy", estimate_json(e.sup_energy)},
            {"dissipation", estimate_json(e.dissipation)},
            {"sup_enstrophy", estimate_json(e.sup_enstrophy)},
            {"sup_v_p", estimate_json(e.sup_v_p)},
            {"enstrophy_integral", estimate_json(e.enstrophy_integral)},
            {"energy_integral", estimate_json(e.energy_integral)},
            {"martingale", estimate_json(e.martingale)},
            {"energy_residual", estimate_json(e.energy_residual)},
            {"enstrophy_residual", estimate_json(e.enstrophy_residual)},
            {"ineq1", probe_json(e.ineq1)},
            {"ineq222", probe_json(e.ineq222)},
            {"lp1", probe_json(e.lp1)},
            {"fraction_tau_h3", e.fraction_tau_h3},
            {"fraction_tau_v", e.fraction_tau_v}};
  ctx.write("ensemble.json", j.dump(2));
  ctx.say("ensemble: " + std::to_string(e.completed) + "/" + std::to_string(e.paths) +
          " paths, C_obs ineq1 = " + format_double(e.ineq1.c_obs) + ", ineq222 = " + format_double(e.ineq222.c_obs) +
          ", lp1 = " + format_double(e.lp1.c_obs));
  return 0;
}

int run_stability(Context& ctx) {
  const Setup s = build_setup(ctx.cfg);
  resolve(ctx, s);
  const StabilityReport r = stability_experiment(s.system, ctx.cfg.settings(), s.c0, ctx.cfg.stability_options());
  Csv csv({"eps", "mean", "std_error", "count", "blown_up", "terminal_mean", "terminal_std_error"});
  json rows = json::array();
  for (const StabilityRow& row : r.rows) {
    csv.row({row.eps, row.weighted.mean, row.weighted.std_error, double(row.weighted.count), double(row.blown_up),
             row.terminal.mean, row.terminal.std_error});
    rows.push_back({{"eps", row.eps},
                    {"weighted", estimate_json(row.weighted)},
                    {"terminal", estimate_json(row.terminal)},
                    {"blown_up", row.blown_up}});
  }
  ctx.write("stability.csv", csv.str());
  ctx.write("stability.json", json{{"rows", rows},
                                   {"slope", r.slope},
                                   {"terminal_slope", r.terminal_slope},
                                   {"C3", r.C3},
                                   {"C1", r.C1},
                                   {"C2", r.C2},
                                   {"xi_monotone", r.xi_monotone}}
                                  .dump(2));
  ctx.say("stability: slope = " + format_double(r.slope) + ", terminal slope = " + format_double(r.terminal_slope));
  return 0;
}

int run_converge(Context& ctx) {
  const std::vector<int>& n_list = ctx.cfg.convergence.n_list;
  const Setup s = build_setup(ctx.cfg, 2 * n_list.back());
  resolve(ctx, s);
  const ConvergenceReport r = convergence_study(s.system, ctx.cfg.settings(), s.c0, n_list, ctx.cfg.convergence.paths,
                                                ctx.cfg.ensemble.base_seed);
  Csv csv({"n", "mean", "std_error", "count"});
  json rows = json::array();
  for (const ConvergenceRow& row : r.rows) {
    csv.row({double(row.n), row.difference.mean, row.difference.std_error, double(row.difference.count)});
    rows.push_back({{"n", row.n}, {"difference", estimate_json(row.difference)}});
  }
  ctx.write("convergence.csv", csv.str());
  ctx.write("convergence.json",
            json{{"rows", rows}, {"paths", r.paths}, {"stochastic", r.stochastic}, {"master_modes", s.system.n()}}
                .dump(2));
  for (const ConvergenceRow& row : r.rows)
    ctx.say("converge: n = " + std::to_string(row.n) + "  |Y_n - Y_2n| = " + format_double(row.difference.mean));
  return 0;
}

int run_verify(Context& ctx) {
  const Setup s = build_setup(ctx.cfg);
  resolve(ctx, s);
  const VerificationReport r = verify_identities(s.system, ctx.cfg.settings(), s.c0, ctx.cfg.verify_options());
  json checks = json::array();
  for (const IdentityCheck& c : r.checks) {
    checks.push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"passed", c.passed}});
    char line[160];
    std::snprintf(line, sizeof line, "%-34s %.3e <= %.0e  %s", c.name.c_str(), c.residual, c.tolerance,
                  c.passed ? "ok" : "FAILED");
    ctx.say(line);
  }
  ctx.write("verify.json", json{{"all_passed", r.all_passed()}, {"checks", checks}}.dump(2));
  return r.all_passed() ? 0 : 1;
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& cfg_in, const RunFlags& flags, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  RunConfig cfg;
  try {
    cfg = apply_flags(cfg_in, flags);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
  Context ctx{cfg, fs::path(cfg.output.directory), log, flags.quiet, {}, json::object()};
  try {
    fs::create_directories(ctx.dir);
  } catch (const std::exception& e) {
    log << "error: cannot create output directory " << ctx.dir.string() << ": " << e.what() << "\n";
    return 2;
  }

  int status = 0;
  std::string error;
  try {
    if (subcommand == "basis")
      status = run_basis(ctx);
    else if (subcommand == "simulate")
      status = run_simulate(ctx);
    else if (subcommand == "ensemble")
      status = run_ensemble_cmd(ctx);
    else if (subcommand == "stability")
      status = run_stability(ctx);
    else if (subcommand == "converge")
      status = run_converge(ctx);
    else if (subcommand == "verify")
      status = run_verify(ctx);
    else {
      log << "error: unknown subcommand '" << subcommand << "'\n";
      return 2;
    }
  } catch (const ConfigError& e) {
    error = e.what();
    status = 2;
  } catch (const std::exception& e) {
    error = e.what();
    status = 1;
  }
  if (!error.empty()) log << "error: " << error << "\n";

  try {
    // The echo keeps the configured directory so --out does not perturb the manifest.
    RunConfig echo = cfg;
    echo.output.directory = cfg_in.output.directory;
    json manifest = {{"tool", "grade2"},
                     {"version", kToolVersion},
                     {"subcommand", subcommand},
                     {"status", status},
                     {"error", error},
                     {"config", json::parse(config_to_json(echo))},
                     {"seeds",
                      {{"base_seed", cfg.ensemble.base_seed},
                       {"verify_seed", cfg.verify.seed},
                       {"direction_seed", cfg.stability.direction_seed},
                       {"initial_random_seed", cfg.initial.random_seed}}},
                     {"noise_model", "G^k(t, Y) = s_k(t) (sigma_k e_shape + rho_k Y)"},
                     {"resolved", ctx.resolved},
                     {"outputs", ctx.outputs}};
    write_text(ctx.dir / "manifest.json", manifest.dump(2));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(ctx.dir / "timing.json", json{{"wall_seconds", wall}}.dump(2));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
  return status;
}

}  // namespace grade2
