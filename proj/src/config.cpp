#include "fxts/defaults.hpp"
#include "fxts/experiment.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace fxts {

namespace {

// Typed, path-aware access to one JSON object. finish() rejects keys that were
// never read.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(where(key) + ": " + what);
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(key, "required field missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t uint(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    return has(key) ? uint(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  Vector vector(const std::string& key) {
    const Json& v = raw(key);
    if (v.is_number()) return Vector::Constant(1, v.get<double>());
    if (!v.is_array()) fail(key, "expected a number or an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  Box box(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(key, "expected [lo, hi]");
    }
    Box b{v[0].get<double>(), v[1].get<double>()};
    if (!(b.hi > b.lo)) fail(key, "needs lo < hi");
    return b;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string profile_for(const ProblemSpec& p) {
  if (p.kind == "toy") return "toy";
  if (p.kind == "rls_synthetic" || p.kind == "rls_csv") return "rls";
  if (p.fixture == "small_rls") return "settling";
  return "toy";
}

ProblemSpec parse_problem(const Json& j) {
  ProblemSpec p;
  if (j.is_string()) {
    Json wrapped = {{"kind", j}};
    return parse_problem(wrapped);
  }
  Fields f(j, "problem");
  p.kind = f.string("kind");
  if (p.kind == "toy") {
  } else if (p.kind == "rls_synthetic") {
    const auto n = f.uint("n");
    const auto m = f.uint("m");
    if (n < 1 || m < 1) f.fail("n", "n and m must be >= 1");
    p.n = static_cast<int>(n);
    p.m = static_cast<int>(m);
    p.noise_std = f.number("noise_std", 0.1);
    if (!(p.noise_std >= 0.0)) f.fail("noise_std", "must be >= 0");
    p.lambda = f.number("lambda");
    p.seed = f.uint("seed");
  } else if (p.kind == "rls_csv") {
    p.path = f.string("path");
    p.lambda = f.number("lambda");
    if (f.has("target")) {
      const Json& t = f.raw("target");
      p.target_is_last = false;
      if (t.is_string()) {
        p.target = t.get<std::string>();
      } else if (t.is_number_unsigned() || (t.is_number_integer() && t.get<std::int64_t>() >= 0)) {
        p.target = t.get<std::size_t>();
      } else {
        f.fail("target", "expected a column name or a non-negative index");
      }
    }
  } else if (p.kind == "fixture") {
    p.fixture = f.string("name");
    if (p.fixture != "quadratic" && p.fixture != "bilinear" && p.fixture != "small_rls") {
      f.fail("name", "unknown fixture '" + p.fixture + "'");
    }
  } else {
    f.fail("kind", "unknown problem '" + p.kind + "'");
  }
  f.finish();
  return p;
}

DynamicsSpec parse_dynamics(const Json& j, const std::string& path, const FxtsParams& base) {
  if (j.is_string()) {
    Json wrapped = {{"kind", j}};
    return parse_dynamics(wrapped, path, base);
  }
  Fields f(j, path);
  DynamicsSpec d;
  d.kind = f.string("kind");
  d.params = base;
  if (d.kind == "fxts") {
    d.params.c1 = f.number("c1", base.c1);
    d.params.c2 = f.number("c2", base.c2);
    d.params.p1 = f.number("p1", base.p1);
    d.params.p2 = f.number("p2", base.p2);
    d.params.grad_guard = f.number("grad_guard", base.grad_guard);
    try {
      validate(d.params);
    } catch (const ParameterError& e) {
      f.fail("", e.what());
    }
  } else if (d.kind != "nominal") {
    f.fail("kind", "unknown dynamics '" + d.kind + "' (expected nominal or fxts)");
  }
  d.label = f.string("label", d.kind);
  if (d.label.empty() || d.label.find_first_of("/\\ ") != std::string::npos) {
    f.fail("label", "must be non-empty without spaces or slashes");
  }
  f.finish();
  return d;
}

IntegratorConfig parse_integrator(const Json& j, const IntegratorConfig& base) {
  IntegratorConfig c = base;
  Fields f(j, "integrator");
  if (f.has("scheme")) {
    try {
      c.scheme = scheme_from_string(f.string("scheme"));
    } catch (const ParameterError& e) {
      f.fail("scheme", e.what());
    }
  }
  c.step = f.number("step", c.step);
  if (f.has("ascent_ratio")) c.ascent_ratio = static_cast<int>(f.uint("ascent_ratio"));
  c.max_steps = f.uint("max_steps", c.max_steps);
  c.stop_grad_tol = f.number("stop_grad_tol", c.stop_grad_tol);
  if (j.contains("stop_dist_tol")) {
    if (f.has("stop_dist_tol")) {
      c.stop_dist_tol = f.number("stop_dist_tol");
    } else {
      c.stop_dist_tol.reset();  // explicit null disables the profile value
    }
  }
  c.record_every = f.uint("record_every", c.record_every);
  f.finish();
  try {
    validate(c);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("integrator: ") + e.what());
  }
  return c;
}

Point parse_point(const Json& j, const std::string& path) {
  Fields f(j, path);
  Point p(f.vector("x"), f.vector("y"));
  f.finish();
  if (!p.all_finite()) f.fail("", "coordinates must be finite");
  return p;
}

RandomInit parse_random(const Json& j, const std::string& path) {
  Fields f(j, path);
  RandomInit r;
  r.count = f.uint("count");
  r.box = f.box("box");
  r.seed = f.uint("seed");
  f.finish();
  return r;
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  Fields root(j, "");
  ExperimentConfig cfg;
  cfg.problem = parse_problem(root.raw("problem"));
  cfg.defaults_profile = root.string("defaults", profile_for(cfg.problem));
  defaults::Profile prof;
  try {
    prof = defaults::profile(cfg.defaults_profile);
  } catch (const ParameterError& e) {
    root.fail("defaults", e.what());
  }
  if (root.has("defaults_version")) {
    if (root.uint("defaults_version") != static_cast<std::uint64_t>(defaults::kVersion)) {
      root.fail("defaults_version", "config was written for a different defaults version");
    }
  }

  const Json& dyn = root.raw("dynamics");
  if (dyn.is_array()) {
    if (dyn.empty()) root.fail("dynamics", "needs at least one entry");
    for (std::size_t i = 0; i < dyn.size(); ++i) {
      cfg.dynamics.push_back(
          parse_dynamics(dyn[i], "dynamics[" + std::to_string(i) + "]", prof.fxts));
    }
  } else {
    cfg.dynamics.push_back(parse_dynamics(dyn, "dynamics", prof.fxts));
  }
  std::set<std::string> labels;
  for (const auto& d : cfg.dynamics) {
    if (!labels.insert(d.label).second) root.fail("dynamics", "duplicate label '" + d.label + "'");
  }

  cfg.integrator = root.has("integrator") ? parse_integrator(root.raw("integrator"), prof.integrator)
                                          : prof.integrator;

  if (!root.has("initial_points")) root.fail("initial_points", "required field missing");
  const Json& init = root.raw("initial_points");
  if (init.is_array()) {
    for (std::size_t i = 0; i < init.size(); ++i) {
      cfg.initial_points.push_back(parse_point(init[i], "initial_points[" + std::to_string(i) + "]"));
    }
  } else {
    Fields f(init, "initial_points");
    if (f.has("explicit")) {
      const Json& ex = f.raw("explicit");
      if (!ex.is_array()) f.fail("explicit", "expected an array of points");
      for (std::size_t i = 0; i < ex.size(); ++i) {
        cfg.initial_points.push_back(
            parse_point(ex[i], "initial_points.explicit[" + std::to_string(i) + "]"));
      }
    }
    if (f.has("random")) cfg.random_init = parse_random(f.raw("random"), "initial_points.random");
    f.finish();
  }
  if (cfg.initial_points.empty() && (!cfg.random_init || cfg.random_init->count == 0)) {
    root.fail("initial_points", "no initial points");
  }

  if (root.has("outputs")) {
    Fields f(root.raw("outputs"), "outputs");
    cfg.out_dir = f.string("directory", "");
    if (f.has("formats")) {
      const Json& fm = f.raw("formats");
      if (!fm.is_array()) f.fail("formats", "expected an array");
      cfg.write_csv = cfg.write_json = false;
      for (const auto& e : fm) {
        const std::string s = e.is_string() ? e.get<std::string>() : "";
        if (s == "csv") {
          cfg.write_csv = true;
        } else if (s == "json") {
          cfg.write_json = true;
        } else {
          f.fail("formats", "entries must be \"csv\" or \"json\"");
        }
      }
    }
    f.finish();
  }

  if (root.has("analysis")) {
    Fields f(root.raw("analysis"), "analysis");
    if (f.has("estimate_pl")) {
      const Json& e = f.raw("estimate_pl");
      PlSpec pl{defaults::pl_region(), defaults::pl_samples(), defaults::pl_seed()};
      if (e.is_boolean()) {
        if (e.get<bool>()) cfg.estimate_pl = pl;
      } else {
        Fields g(e, "analysis.estimate_pl");
        if (g.has("box")) pl.region = g.box("box");
        pl.n_samples = g.uint("n_samples", pl.n_samples);
        if (pl.n_samples < 1) g.fail("n_samples", "must be >= 1");
        pl.seed = g.uint("seed", pl.seed);
        g.finish();
        cfg.estimate_pl = pl;
      }
    }
    cfg.settling_bound = f.boolean("settling_bound", false);
    cfg.lyapunov_trace = f.boolean("lyapunov_trace", false);
    f.finish();
    if (cfg.settling_bound && !cfg.estimate_pl) {
      throw ConfigError("analysis.settling_bound: requires analysis.estimate_pl");
    }
  }
  cfg.integrator.record_lyapunov = cfg.lyapunov_trace;

  cfg.compare_dist_tol = defaults::compare_dist_tol();
  if (root.has("compare")) {
    Fields f(root.raw("compare"), "compare");
    cfg.compare_dist_tol = f.number("dist_tol", cfg.compare_dist_tol);
    if (!(cfg.compare_dist_tol > 0.0)) f.fail("dist_tol", "must be > 0");
    f.finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  ExperimentConfig cfg = parse_config(j);
  // Dataset paths in a config file are relative to the file.
  if (cfg.problem.kind == "rls_csv" && std::filesystem::path(cfg.problem.path).is_relative()) {
    cfg.problem.path = (path.parent_path() / cfg.problem.path).lexically_normal().string();
  }
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["defaults"] = cfg.defaults_profile;
  j["defaults_version"] = defaults::kVersion;

  Json p;
  p["kind"] = cfg.problem.kind;
  if (cfg.problem.kind == "rls_synthetic") {
    p["n"] = cfg.problem.n;
    p["m"] = cfg.problem.m;
    p["noise_std"] = cfg.problem.noise_std;
    p["lambda"] = cfg.problem.lambda;
    p["seed"] = cfg.problem.seed;
  } else if (cfg.problem.kind == "rls_csv") {
    p["path"] = cfg.problem.path;
    p["lambda"] = cfg.problem.lambda;
    if (!cfg.problem.target_is_last) {
      if (const auto* name = std::get_if<std::string>(&cfg.problem.target)) {
        p["target"] = *name;
      } else {
        p["target"] = std::get<std::size_t>(cfg.problem.target);
      }
    }
  } else if (cfg.problem.kind == "fixture") {
    p["name"] = cfg.problem.fixture;
  }
  j["problem"] = p;

  Json dyn = Json::array();
  for (const auto& d : cfg.dynamics) {
    Json e;
    e["kind"] = d.kind;
    if (d.kind == "fxts") {
      e["c1"] = d.params.c1;
      e["c2"] = d.params.c2;
      e["p1"] = d.params.p1;
      e["p2"] = d.params.p2;
      e["grad_guard"] = d.params.grad_guard;
    }
    e["label"] = d.label;
    dyn.push_back(e);
  }
  j["dynamics"] = dyn;

  const auto& c = cfg.integrator;
  Json in;
  in["scheme"] = to_string(c.scheme);
  in["step"] = c.step;
  in["ascent_ratio"] = c.ascent_ratio;
  in["max_steps"] = c.max_steps;
  in["stop_grad_tol"] = c.stop_grad_tol;
  in["stop_dist_tol"] = c.stop_dist_tol ? Json(*c.stop_dist_tol) : Json(nullptr);
  in["record_every"] = c.record_every;
  j["integrator"] = in;

  Json init;
  Json ex = Json::array();
  for (const auto& pt : cfg.initial_points) ex.push_back({{"x", vec_json(pt.x)}, {"y", vec_json(pt.y)}});
  init["explicit"] = ex;
  if (cfg.random_init) {
    init["random"] = {{"count", cfg.random_init->count},
                      {"box", {cfg.random_init->box.lo, cfg.random_init->box.hi}},
                      {"seed", cfg.random_init->seed}};
  }
  j["initial_points"] = init;

  Json out;
  if (!cfg.out_dir.empty()) out["directory"] = cfg.out_dir;
  Json formats = Json::array();
  if (cfg.write_csv) formats.push_back("csv");
  if (cfg.write_json) formats.push_back("json");
  out["formats"] = formats;
  j["outputs"] = out;

  Json an;
  if (cfg.estimate_pl) {
    an["estimate_pl"] = {{"box", {cfg.estimate_pl->region.lo, cfg.estimate_pl->region.hi}},
                         {"n_samples", cfg.estimate_pl->n_samples},
                         {"seed", cfg.estimate_pl->seed}};
  }
  an["settling_bound"] = cfg.settling_bound;
  an["lyapunov_trace"] = cfg.lyapunov_trace;
  j["analysis"] = an;
  j["compare"] = {{"dist_tol", cfg.compare_dist_tol}};
  return j;
}

void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.problem.kind == "rls_synthetic") cfg.problem.seed = seed;
  if (cfg.random_init) cfg.random_init->seed = seed;
  if (cfg.estimate_pl) cfg.estimate_pl->seed = seed;
}

}  // namespace fxts
