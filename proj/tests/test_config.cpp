#include <doctest.h>

#include "grade2/config.hpp"
#include "grade2/errors.hpp"
#include "grade2/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace grade2;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

// Small enough to run in well under a second.
const char* kTiny = R"({
  "geometry": {"n_radial": 20, "n_angular_modes": 8},
  "basis": {"n_modes": 8},
  "noise": {"channels": [{"sigma": 0.2, "rho": 0.1, "shape_mode_index": 1,
                          "envelope": {"kind": "cosine", "frequency": 2.0}}]},
  "forcing": {"kind": "modes", "modes": [{"index": 2, "value": 0.3}]},
  "initial": {"modes": [{"index": 0, "value": 0.5}, {"index": 3, "value": -0.2}]},
  "time": {"T": 0.125, "dt": 0.0009765625, "save_stride": 4},
  "ensemble": {"paths": 6, "base_seed": 11},
  "stability": {"paths": 4, "eps": [0.01, 0.005]},
  "convergence": {"n_list": [2, 4]},
  "verify": {"samples": 5, "ito_states": 3}
})";

}  // namespace

TEST_CASE("config: empty document yields the defaults") {
  const RunConfig c = parse_config("{}");
  CHECK(c == RunConfig{});
  CHECK(c.time.dt == doctest::Approx(1.0 / 4096));
  CHECK(c.basis.n_modes == 48);
  REQUIRE(c.noise.size() == 1);
  CHECK(c.noise[0].sigma == 0.1);
  CHECK(c.settings().steps() == 4096);
}

TEST_CASE("config: dt follows T when omitted") {
  const RunConfig c = parse_config(R"({"time": {"T": 2.0}})");
  CHECK(c.time.dt == 2.0 / 4096);
}

TEST_CASE("config: invalid values are named") {
  CHECK(message_of(R"({"physics": {"gamma": 0}})").find("physics.gamma") != std::string::npos);
  CHECK(message_of(R"({"ensemble": {"paths": 0}})").find("ensemble.paths") != std::string::npos);
  CHECK(message_of(R"({"time": {"T": 1.0, "dt": 0.3}})").find("time.dt") != std::string::npos);
  CHECK(message_of(R"({"basis": {"n_modes": 4}, "initial": {"modes": [{"index": 4, "value": 1}]}})")
            .find("initial.modes") != std::string::npos);
  CHECK(message_of(R"({"convergence": {"n_list": [8, 8]}})").find("convergence.n_list") != std::string::npos);
  CHECK(message_of(R"({"time": {"scheme": "rk4"}})").find("time.scheme") != std::string::npos);
}

TEST_CASE("config: unknown keys and wrong types are rejected") {
  CHECK(message_of(R"({"physics": {"viscocity": 0.1}})").find("viscocity") != std::string::npos);
  CHECK(message_of(R"({"physiks": {}})").find("physiks") != std::string::npos);
  CHECK(message_of(R"({"physics": {"nu": "0.1"}})").find("physics.nu") != std::string::npos);
  CHECK(message_of(R"({"ensemble": {"paths": 2.5}})").find("ensemble.paths") != std::string::npos);
  CHECK(message_of("{not json").find("JSON") != std::string::npos);
}

TEST_CASE("config: serialisation round trip") {
  const RunConfig a = parse_config(kTiny);
  CHECK(parse_config(config_to_json(a)) == a);
  CHECK(parse_config(config_to_json(RunConfig{})) == RunConfig{});

  RunConfig b = a;
  b.time.scheme = Scheme::semi_implicit;
  b.forcing.kind = ForcingSpec::Kind::rotation;
  b.forcing.amplitude = 0.7;
  b.forcing.coefficients.clear();
  b.physics.nu = 1.0 / 3.0;
  CHECK(parse_config(config_to_json(b)) == b);
  CHECK(!(b == a));
}

TEST_CASE("config: flags override seeds, paths and directory") {
  RunFlags f;
  f.seed = 42;
  f.paths = 9;
  f.out = "elsewhere";
  const RunConfig c = apply_flags(parse_config(kTiny), f);
  CHECK(c.ensemble.base_seed == 42);
  CHECK(c.ensemble.paths == 9);
  CHECK(c.stability.paths == 9);
  CHECK(c.convergence.paths == 9);
  CHECK(c.output.directory == "elsewhere");
}

TEST_CASE("runner: repeated runs are byte identical") {
  const RunConfig cfg = parse_config(kTiny);
  const fs::path root = fs::temp_directory_path() / "grade2_runner_test";
  fs::remove_all(root);
  std::ostringstream log;
  for (const char* sub : {"simulate", "ensemble", "verify", "basis"}) {
    CAPTURE(sub);
    RunFlags f;
    f.quiet = true;
    f.out = root / (std::string(sub) + "_a");
    REQUIRE(run(sub, cfg, f, log) == 0);
    f.out = root / (std::string(sub) + "_b");
    REQUIRE(run(sub, cfg, f, log) == 0);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(root / (std::string(sub) + "_a"))) {
      const std::string name = entry.path().filename().string();
      if (name == "timing.json") continue;
      CAPTURE(name);
      CHECK(slurp(entry.path()) == slurp(root / (std::string(sub) + "_b") / name));
      ++compared;
    }
    CHECK(compared >= 2);
  }
  fs::remove_all(root);
}

TEST_CASE("runner: a different seed changes the trajectory") {
  const RunConfig cfg = parse_config(kTiny);
  const fs::path root = fs::temp_directory_path() / "grade2_runner_seed";
  fs::remove_all(root);
  std::ostringstream log;
  RunFlags f;
  f.quiet = true;
  f.out = root / "a";
  REQUIRE(run("simulate", cfg, f, log) == 0);
  f.out = root / "b";
  f.seed = 12;
  REQUIRE(run("simulate", cfg, f, log) == 0);
  CHECK(slurp(root / "a" / "trajectory.csv") != slurp(root / "b" / "trajectory.csv"));
  fs::remove_all(root);
}

TEST_CASE("runner: failures map to exit codes") {
  RunConfig cfg = parse_config(kTiny);
  std::ostringstream log;
  const fs::path root = fs::temp_directory_path() / "grade2_runner_fail";
  fs::remove_all(root);
  RunFlags f;
  f.quiet = true;
  f.out = root / "tampered";
  cfg.verify.gamma_tamper = 0.5;
  CHECK(run("verify", cfg, f, log) == 1);
  CHECK(fs::exists(root / "tampered" / "manifest.json"));
  CHECK(run("nonsense", cfg, f, log) == 2);
  fs::remove_all(root);
}
