#pragma once

// Run configuration: a strict JSON schema with documented defaults.
//
//   geometry    {n_radial: 24, n_angular_modes: 12}
//   physics     {nu: 0.1, alpha: 0.1, gamma: 1.0}
//   basis       {n_modes: 48, mode_limit: -1, degree_limit: -1, cache_dir: ""}
//   noise       {channels: [{sigma: 0.1, rho: 0.0, shape_mode_index: 0,
//                            envelope: {kind: "constant" | "cosine", frequency}}]}
//   forcing     {kind: "none" | "rotation" | "modes", amplitude: 0.0, modes: [{index, value}]}
//   initial     {modes: [{index: 0, value: 0.5}], random_norm: 0.0, random_seed: 0}
//   time        {T: 1.0, dt: T/4096, save_stride: 1, scheme: "explicit" | "semi_implicit"}
//   stopping    {N_h3: 1e3, N_v: 1e3, blowup_h3: 1e6}
//   dynamics    {nonlinear: true}
//   ensemble    {paths: 100, base_seed: 1, p: 4}
//   stability   {eps: [1e-2, 5e-3, 2.5e-3], paths: 200, direction_seed: 7, C3: 1, C1: 0, C2: 0}
//   convergence {n_list: [8, 16, 32], paths: 1}
//   verify      {samples: 100, ito_states: 20, seed: 1, field_scale: 1, gamma_tamper: 0}
//   output      {directory: "out", per_path_csv: false}

#include "grade2/experiments.hpp"
#include "grade2/sde.hpp"
#include "grade2/spaces.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace grade2 {

struct RunConfig {
  struct Geometry {
    int n_radial = 24;
    int n_angular_modes = 12;
    bool operator==(const Geometry&) const = default;
  } geometry;

  PhysicalParams physics;

  struct Basis {
    int n_modes = 48;
    int mode_limit = -1;
    int degree_limit = -1;
    std::string cache_dir;
    bool operator==(const Basis&) const = default;
  } basis;

  std::vector<NoiseChannel> noise{NoiseChannel{0.1, 0.0, 0, {}}};
  ForcingSpec forcing;

  struct Initial {
    std::vector<std::pair<int, double>> modes{{0, 0.5}};
    double random_norm = 0.0;
    std::uint64_t random_seed = 0;
    bool operator==(const Initial&) const = default;
  } initial;

  struct Time {
    double T = 1.0;
    double dt = 1.0 / 4096;
    int save_stride = 1;
    Scheme scheme = Scheme::explicit_euler;
    bool operator==(const Time&) const = default;
  } time;

  struct Stopping {
    double N_h3 = 1e3;
    double N_v = 1e3;
    double blowup_h3 = 1e6;
    bool operator==(const Stopping&) const = default;
  } stopping;

  bool nonlinear = true;

  struct Ensemble {
    int paths = 100;
    std::uint64_t base_seed = 1;
    double p = 4.0;
    bool operator==(const Ensemble&) const = default;
  } ensemble;

  struct Stability {
    std::vector<double> eps{1e-2, 5e-3, 2.5e-3};
    int paths = 200;
    std::uint64_t direction_seed = 7;
    double C3 = 1.0, C1 = 0.0, C2 = 0.0;
    bool operator==(const Stability&) const = default;
  } stability;

  struct Convergence {
    std::vector<int> n_list{8, 16, 32};
    int paths = 1;
    bool operator==(const Convergence&) const = default;
  } convergence;

  struct Verify {
    int samples = 100;
    int ito_states = 20;
    std::uint64_t seed = 1;
    double field_scale = 1.0;
    double gamma_tamper = 0.0;
    bool operator==(const Verify&) const = default;
  } verify;

  struct Output {
    std::string directory = "out";
    bool per_path_csv = false;
    bool operator==(const Output&) const = default;
  } output;

  SimulationSettings settings() const;
  StabilityOptions stability_options() const;
  VerifyOptions verify_options() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Strict parse: unknown keys and wrong types are ConfigErrors naming the path.
RunConfig parse_config(const std::string& text);
/// Fully resolved document; parse_config(config_to_json(c)) == c.
std::string config_to_json(const RunConfig& c);

}  // namespace grade2
