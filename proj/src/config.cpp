#include "grade2/config.hpp"

#include "grade2/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

namespace grade2 {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(at(key), "must be finite");
  }
  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    out = v.get<int>();
  }
  void seed(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
      fail(at(key), "expected a nonnegative integer");
    out = v.get<std::uint64_t>();
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_boolean()) fail(at(key), "expected true or false");
    out = j_.at(key).get<bool>();
  }
  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_string()) fail(at(key), "expected a string");
    out = j_.at(key).get<std::string>();
  }
  const json* array(const std::string& key) {
    if (!has(key)) return nullptr;
    if (!j_.at(key).is_array()) fail(at(key), "expected an array");
    return &j_.at(key);
  }
  std::optional<Section> object(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Section(j_.at(key), at(key));
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::pair<int, double>> read_modes(const json& arr, const std::string& path) {
  std::vector<std::pair<int, double>> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section s(arr[i], path + "[" + std::to_string(i) + "]");
    int index = -1;
    double value = 0;
    if (!s.has("index")) Section::fail(s.at("index"), "required");
    if (!s.has("value")) Section::fail(s.at("value"), "required");
    s.integer("index", index);
    s.number("value", value);
    s.finish();
    out.emplace_back(index, value);
  }
  return out;
}

json write_modes(const std::vector<std::pair<int, double>>& modes) {
  json arr = json::array();
  for (auto [i, v] : modes) arr.push_back({{"index", i}, {"value", v}});
  return arr;
}

const char* scheme_name(Scheme s) { return s == Scheme::explicit_euler ? "explicit" : "semi_implicit"; }

const char* forcing_name(ForcingSpec::Kind k) {
  switch (k) {
    case ForcingSpec::Kind::none:
      return "none";
    case ForcingSpec::Kind::rotation:
      return "rotation";
    case ForcingSpec::Kind::modes:
      return "modes";
  }
  return "none";
}

bool same(const NoiseChannel& a, const NoiseChannel& b) {
  return a.sigma == b.sigma && a.rho == b.rho && a.shape_mode == b.shape_mode && a.envelope.kind == b.envelope.kind &&
         a.envelope.frequency == b.envelope.frequency;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  const bool noise = a.noise.size() == b.noise.size() &&
                     std::equal(a.noise.begin(), a.noise.end(), b.noise.begin(), same);
  return a.geometry == b.geometry && a.physics.nu == b.physics.nu && a.physics.alpha == b.physics.alpha &&
         a.physics.gamma == b.physics.gamma && a.basis == b.basis && noise && a.forcing.kind == b.forcing.kind &&
         a.forcing.amplitude == b.forcing.amplitude && a.forcing.coefficients == b.forcing.coefficients &&
         a.initial == b.initial && a.time == b.time && a.stopping == b.stopping && a.nonlinear == b.nonlinear &&
         a.ensemble == b.ensemble && a.stability == b.stability && a.convergence == b.convergence &&
         a.verify == b.verify && a.output == b.output;
}

SimulationSettings RunConfig::settings() const {
  SimulationSettings s;
  s.T = time.T;
  s.dt = time.dt;
  s.save_stride = time.save_stride;
  s.scheme = time.scheme;
  s.stop_h3 = stopping.N_h3;
  s.stop_v = stopping.N_v;
  s.blowup_h3 = stopping.blowup_h3;
  s.p = ensemble.p;
  return s;
}

StabilityOptions RunConfig::stability_options() const {
  StabilityOptions o;
  o.eps = stability.eps;
  o.paths = stability.paths;
  o.base_seed = ensemble.base_seed;
  o.direction_seed = stability.direction_seed;
  o.C3 = stability.C3;
  o.C1 = stability.C1;
  o.C2 = stability.C2;
  return o;
}

VerifyOptions RunConfig::verify_options() const {
  VerifyOptions o;
  o.samples = verify.samples;
  o.ito_states = verify.ito_states;
  o.seed = verify.seed;
  o.field_scale = verify.field_scale;
  o.gamma_tamper = verify.gamma_tamper;
  return o;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& path, const std::string& what) { Section::fail(path, what); };
  if (geometry.n_radial < 4) fail("geometry.n_radial", "must be at least 4");
  if (geometry.n_angular_modes < 1) fail("geometry.n_angular_modes", "must be at least 1");
  if (!(physics.nu > 0)) fail("physics.nu", "must be > 0");
  if (!(physics.alpha > 0)) fail("physics.alpha", "must be > 0");
  if (!(physics.gamma > 0)) fail("physics.gamma", "must be > 0");
  if (basis.n_modes < 1) fail("basis.n_modes", "must be at least 1");
  const int n = basis.n_modes;
  for (std::size_t k = 0; k < noise.size(); ++k) {
    const std::string p = "noise.channels[" + std::to_string(k) + "]";
    if (noise[k].sigma < 0) fail(p + ".sigma", "must be >= 0");
    if (noise[k].shape_mode < 0 || noise[k].shape_mode >= n) fail(p + ".shape_mode_index", "must be < basis.n_modes");
  }
  for (auto [i, v] : forcing.coefficients)
    if (i < 0 || i >= n) fail("forcing.modes", "index " + std::to_string(i) + " must be < basis.n_modes");
  for (auto [i, v] : initial.modes)
    if (i < 0 || i >= n) fail("initial.modes", "index " + std::to_string(i) + " must be < basis.n_modes");
  if (initial.random_norm < 0) fail("initial.random_norm", "must be >= 0");
  if (!(time.T > 0)) fail("time.T", "must be > 0");
  if (!(time.dt > 0) || time.dt > time.T) fail("time.dt", "must lie in (0, T]");
  if (std::abs(std::llround(time.T / time.dt) * time.dt - time.T) > 1e-9 * time.T)
    fail("time.dt", "must divide T");
  if (time.save_stride < 1) fail("time.save_stride", "must be at least 1");
  if (!(stopping.N_h3 > 0)) fail("stopping.N_h3", "must be > 0");
  if (!(stopping.N_v > 0)) fail("stopping.N_v", "must be > 0");
  if (!(stopping.blowup_h3 > 0)) fail("stopping.blowup_h3", "must be > 0");
  if (ensemble.paths < 1) fail("ensemble.paths", "must be at least 1");
  if (!(ensemble.p >= 2)) fail("ensemble.p", "must be >= 2");
  if (stability.eps.empty()) fail("stability.eps", "must not be empty");
  for (double e : stability.eps)
    if (!(e >= 0)) fail("stability.eps", "entries must be >= 0");
  if (stability.paths < 1) fail("stability.paths", "must be at least 1");
  if (stability.C3 < 0 || stability.C1 < 0 || stability.C2 < 0) fail("stability", "weight constants must be >= 0");
  if (convergence.n_list.empty()) fail("convergence.n_list", "must not be empty");
  for (std::size_t i = 0; i < convergence.n_list.size(); ++i)
    if (convergence.n_list[i] < 1 || (i > 0 && convergence.n_list[i] <= convergence.n_list[i - 1]))
      fail("convergence.n_list", "must be positive and ascending");
  if (convergence.paths < 1) fail("convergence.paths", "must be at least 1");
  if (verify.samples < 1) fail("verify.samples", "must be at least 1");
  if (verify.ito_states < 1) fail("verify.ito_states", "must be at least 1");
  if (verify.field_scale < 0) fail("verify.field_scale", "must be >= 0");
  if (output.directory.empty()) fail("output.directory", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(doc, "");
  if (auto s = root.object("geometry")) {
    s->integer("n_radial", c.geometry.n_radial);
    s->integer("n_angular_modes", c.geometry.n_angular_modes);
    s->finish();
  }
  if (auto s = root.object("physics")) {
    s->number("nu", c.physics.nu);
    s->number("alpha", c.physics.alpha);
    s->number("gamma", c.physics.gamma);
    s->finish();
  }
  if (auto s = root.object("basis")) {
    s->integer("n_modes", c.basis.n_modes);
    s->integer("mode_limit", c.basis.mode_limit);
    s->integer("degree_limit", c.basis.degree_limit);
    s->string("cache_dir", c.basis.cache_dir);
    s->finish();
  }
  if (auto s = root.object("noise")) {
    if (const json* arr = s->array("channels")) {
      c.noise.clear();
      for (std::size_t k = 0; k < arr->size(); ++k) {
        Section ch((*arr)[k], s->at("channels") + "[" + std::to_string(k) + "]");
        NoiseChannel n;
        ch.number("sigma", n.sigma);
        ch.number("rho", n.rho);
        ch.integer("shape_mode_index", n.shape_mode);
        if (auto env = ch.object("envelope")) {
          std::string kind = "constant";
          env->string("kind", kind);
          if (kind == "cosine")
            n.envelope.kind = Envelope::Kind::cosine;
          else if (kind != "constant")
            Section::fail(env->at("kind"), "expected \"constant\" or \"cosine\"");
          env->number("frequency", n.envelope.frequency);
          env->finish();
        }
        ch.finish();
        c.noise.push_back(n);
      }
    }
    s->finish();
  }
  if (auto s = root.object("forcing")) {
    std::string kind = "none";
    s->string("kind", kind);
    if (kind == "rotation")
      c.forcing.kind = ForcingSpec::Kind::rotation;
    else if (kind == "modes")
      c.forcing.kind = ForcingSpec::Kind::modes;
    else if (kind != "none")
      Section::fail(s->at("kind"), "expected \"none\", \"rotation\" or \"modes\"");
    s->number("amplitude", c.forcing.amplitude);
    if (const json* arr = s->array("modes")) c.forcing.coefficients = read_modes(*arr, s->at("modes"));
    s->finish();
  }
  if (auto s = root.object("initial")) {
    if (const json* arr = s->array("modes")) c.initial.modes = read_modes(*arr, s->at("modes"));
    s->number("random_norm", c.initial.random_norm);
    s->seed("random_seed", c.initial.random_seed);
    s->finish();
  }
  bool dt_given = false;
  if (auto s = root.object("time")) {
    s->number("T", c.time.T);
    dt_given = s->has("dt");
    s->number("dt", c.time.dt);
    s->integer("save_stride", c.time.save_stride);
    std::string scheme = "explicit";
    s->string("scheme", scheme);
    if (scheme == "semi_implicit")
      c.time.scheme = Scheme::semi_implicit;
    else if (scheme != "explicit")
      Section::fail(s->at("scheme"), "expected \"explicit\" or \"semi_implicit\"");
    s->finish();
  }
  if (!dt_given) c.time.dt = c.time.T / 4096;
  if (auto s = root.object("stopping")) {
    s->number("N_h3", c.stopping.N_h3);
    s->number("N_v", c.stopping.N_v);
    s->number("blowup_h3", c.stopping.blowup_h3);
    s->finish();
  }
  if (auto s = root.object("dynamics")) {
    s->boolean("nonlinear", c.nonlinear);
    s->finish();
  }
  if (auto s = root.object("ensemble")) {
    s->integer("paths", c.ensemble.paths);
    s->seed("base_seed", c.ensemble.base_seed);
    s->number("p", c.ensemble.p);
    s->finish();
  }
  if (auto s = root.object("stability")) {
    if (const json* arr = s->array("eps")) {
      c.stability.eps.clear();
      for (const json& v : *arr) {
        if (!v.is_number()) Section::fail(s->at("eps"), "expected numbers");
        c.stability.eps.push_back(v.get<double>());
      }
    }
    s->integer("paths", c.stability.paths);
    s->seed("direction_seed", c.stability.direction_seed);
    s->number("C3", c.stability.C3);
    s->number("C1", c.stability.C1);
    s->number("C2", c.stability.C2);
    s->finish();
  }
  if (auto s = root.object("convergence")) {
    if (const json* arr = s->array("n_list")) {
      c.convergence.n_list.clear();
      for (const json& v : *arr) {
        if (!v.is_number_integer()) Section::fail(s->at("n_list"), "expected integers");
        c.convergence.n_list.push_back(v.get<int>());
      }
    }
    s->integer("paths", c.convergence.paths);
    s->finish();
  }
  if (auto s = root.object("verify")) {
    s->integer("samples", c.verify.samples);
    s->integer("ito_states", c.verify.ito_states);
    s->seed("seed", c.verify.seed);
    s->number("field_scale", c.verify.field_scale);
    s->number("gamma_tamper", c.verify.gamma_tamper);
    s->finish();
  }
  if (auto s = root.object("output")) {
    s->string("directory", c.output.directory);
    s->boolean("per_path_csv", c.output.per_path_csv);
    s->finish();
  }
  root.finish();
  c.validate();
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json noise = json::array();
  for (const NoiseChannel& n : c.noise) {
    json env = {{"kind", n.envelope.kind == Envelope::Kind::cosine ? "cosine" : "constant"},
                {"frequency", n.envelope.frequency}};
    noise.push_back({{"sigma", n.sigma}, {"rho", n.rho}, {"shape_mode_index", n.shape_mode}, {"envelope", env}});
  }
  json doc = {
      {"geometry", {{"n_radial", c.geometry.n_radial}, {"n_angular_modes", c.geometry.n_angular_modes}}},
      {"physics", {{"nu", c.physics.nu}, {"alpha", c.physics.alpha}, {"gamma", c.physics.gamma}}},
      {"basis",
       {{"n_modes", c.basis.n_modes},
        {"mode_limit", c.basis.mode_limit},
        {"degree_limit", c.basis.degree_limit},
        {"cache_dir", c.basis.cache_dir}}},
      {"noise", {{"channels", noise}}},
      {"forcing",
       {{"kind", forcing_name(c.forcing.kind)},
        {"amplitude", c.forcing.amplitude},
        {"modes", write_modes(c.forcing.coefficients)}}},
      {"initial",
       {{"modes", write_modes(c.initial.modes)},
        {"random_norm", c.initial.random_norm},
        {"random_seed", c.initial.random_seed}}},
      {"time",
       {{"T", c.time.T}, {"dt", c.time.dt}, {"save_stride", c.time.save_stride}, {"scheme", scheme_name(c.time.scheme)}}},
      {"stopping", {{"N_h3", c.stopping.N_h3}, {"N_v", c.stopping.N_v}, {"blowup_h3", c.stopping.blowup_h3}}},
      {"dynamics", {{"nonlinear", c.nonlinear}}},
      {"ensemble", {{"paths", c.ensemble.paths}, {"base_seed", c.ensemble.base_seed}, {"p", c.ensemble.p}}},
      {"stability",
       {{"eps", c.stability.eps},
        {"paths", c.stability.paths},
        {"direction_seed", c.stability.direction_seed},
        {"C3", c.stability.C3},
        {"C1", c.stability.C1},
        {"C2", c.stability.C2}}},
      {"convergence", {{"n_list", c.convergence.n_list}, {"paths", c.convergence.paths}}},
      {"verify",
       {{"samples", c.verify.samples},
        {"ito_states", c.verify.ito_states},
        {"seed", c.verify.seed},
        {"field_scale", c.verify.field_scale},
        {"gamma_tamper", c.verify.gamma_tamper}}},
      {"output", {{"directory", c.output.directory}, {"per_path_csv", c.output.per_path_csv}}},
  };
  return doc.dump(2);
}

}  // namespace grade2
