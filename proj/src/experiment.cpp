#include "fxts/experiment.hpp"

#include "fxts/defaults.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace fxts {

namespace {

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// JSON has no infinity or NaN; those become null.
Json num_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
Json opt_json(const std::optional<double>& v) { return v ? num_json(*v) : Json(nullptr); }

Json record_json(const TrajectoryRecord& r) {
  return {{"iter", r.iter},
          {"t", r.t},
          {"grad_norm", num_json(r.grad_norm)},
          {"value", num_json(r.value)},
          {"dist_sq", opt_json(r.dist_sq)},
          {"lyapunov", opt_json(r.lyapunov)}};
}

Json run_json(const RunResult& r) {
  Json j;
  j["dynamics"] = r.dynamics;
  j["init_id"] = r.init_id;
  j["start"] = {{"x", vec_json(r.start.x)}, {"y", vec_json(r.start.y)}};
  j["termination"] = to_string(r.trajectory.reason);
  j["iterations"] = r.trajectory.iterations;
  j["iterations_to_tol"] = r.iterations_to_tol ? Json(*r.iterations_to_tol) : Json(nullptr);
  j["final"] = r.trajectory.steps.empty() ? Json(nullptr) : record_json(r.trajectory.steps.back());
  if (r.error) {
    j["error"] = *r.error;
    j["divergence_step"] = r.divergence_step ? Json(*r.divergence_step) : Json(nullptr);
  }
  return j;
}

std::string traj_file_name(const RunResult& r) {
  return "traj_" + r.dynamics + "_" + std::to_string(r.init_id) + ".csv";
}

std::optional<double> final_dist(const RunResult& r) {
  if (r.trajectory.steps.empty()) return std::nullopt;
  return r.trajectory.steps.back().dist_sq;
}

Json comparison_json(const ExperimentConfig& cfg, const ExperimentReport& report) {
  // The ratio compares the first nominal entry against the first fxts entry.
  std::string nominal_label, fxts_label;
  for (const auto& d : cfg.dynamics) {
    if (d.kind == "nominal" && nominal_label.empty()) nominal_label = d.label;
    if (d.kind == "fxts" && fxts_label.empty()) fxts_label = d.label;
  }
  std::map<std::size_t, std::vector<const RunResult*>> by_init;
  for (const auto& r : report.runs) by_init[r.init_id].push_back(&r);

  Json inits = Json::array();
  bool all_faster = !nominal_label.empty() && !fxts_label.empty();
  for (const auto& [id, runs] : by_init) {
    Json e;
    e["init_id"] = id;
    Json itt, fd;
    const RunResult* nom = nullptr;
    const RunResult* fx = nullptr;
    for (const RunResult* r : runs) {
      itt[r->dynamics] = r->iterations_to_tol ? Json(*r->iterations_to_tol) : Json(nullptr);
      fd[r->dynamics] = opt_json(final_dist(*r));
      if (r->dynamics == nominal_label) nom = r;
      if (r->dynamics == fxts_label) fx = r;
    }
    e["iterations_to_tol"] = itt;
    e["final_dist_sq"] = fd;
    Json ratio(nullptr);
    if (nom && fx) {
      const auto dn = final_dist(*nom);
      const auto df = final_dist(*fx);
      if (dn && df && *df > 0.0) ratio = num_json(*dn / *df);
      // A run that never reaches the tolerance counts as infinitely slow.
      const bool faster = fx->iterations_to_tol &&
                          (!nom->iterations_to_tol || *fx->iterations_to_tol < *nom->iterations_to_tol);
      all_faster = all_faster && faster;
    }
    e["final_dist_ratio"] = ratio;
    inits.push_back(e);
  }
  Json j;
  j["dist_tol"] = cfg.compare_dist_tol;
  j["ratio"] = nominal_label.empty() || fxts_label.empty()
                   ? Json(nullptr)
                   : Json("final_dist_sq(" + nominal_label + ") / final_dist_sq(" + fxts_label + ")");
  j["inits"] = inits;
  j["fxts_faster_for_every_init"] = all_faster;
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string() + ": write failed");
}

MaterializedProblem materialize_problem(const ProblemSpec& spec) {
  MaterializedProblem out;
  if (spec.kind == "toy") {
    out.problem = make_toy_problem();
  } else if (spec.kind == "rls_synthetic") {
    out.rls = generate_synthetic_rls(spec.n, spec.m, spec.noise_std, spec.lambda, spec.seed);
    out.problem = make_rls_problem(*out.rls);
  } else if (spec.kind == "rls_csv") {
    const ColumnRef target = spec.target_is_last ? ColumnRef{kLastColumn} : spec.target;
    out.rls = load_csv_dataset(spec.path, target, spec.lambda).instance;
    out.problem = make_rls_problem(*out.rls);
  } else if (spec.kind == "fixture") {
    if (spec.fixture == "small_rls") out.rls = small_rls_instance();
    out.problem = make_fixture(spec.fixture);
  } else {
    throw ConfigError("problem.kind: unknown problem '" + spec.kind + "'");
  }
  return out;
}

std::vector<Point> resolve_initial_points(const ExperimentConfig& cfg, const MinMaxProblem& problem) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < cfg.initial_points.size(); ++i) {
    const Point& p = cfg.initial_points[i];
    if (p.n() != problem.n || p.m() != problem.m) {
      throw ConfigError("initial_points.explicit[" + std::to_string(i) + "]: expected x of length " +
                        std::to_string(problem.n) + " and y of length " + std::to_string(problem.m));
    }
    pts.push_back(p);
  }
  if (cfg.random_init) {
    auto extra = sample_box(problem.n, problem.m, cfg.random_init->box, cfg.random_init->count,
                            cfg.random_init->seed);
    for (auto& p : extra) pts.push_back(std::move(p));
  }
  return pts;
}

TangentField make_field(const DynamicsSpec& spec, const MinMaxProblem& problem) {
  if (spec.kind == "nominal") return nominal_field(problem);
  if (spec.kind == "fxts") return fxts_field(problem, spec.params);
  throw ConfigError("dynamics.kind: unknown dynamics '" + spec.kind + "'");
}

ExperimentReport execute(const ExperimentConfig& cfg) {
  MaterializedProblem mp;
  try {
    mp = materialize_problem(cfg.problem);
  } catch (const ConfigError&) {
    throw;
  } catch (const DatasetError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  const MinMaxProblem& problem = mp.problem;
  if (cfg.integrator.stop_dist_tol && !problem.saddle) {
    throw ConfigError("integrator.stop_dist_tol: problem has no known saddle point");
  }
  if ((cfg.lyapunov_trace || cfg.estimate_pl) && !problem.has_inner_oracles()) {
    throw ConfigError("analysis: problem '" + problem.name + "' has no inner oracles");
  }
  const auto starts = resolve_initial_points(cfg, problem);

  ExperimentReport report;
  if (cfg.estimate_pl) {
    report.pl_estimate = estimate_pl_constants(problem, cfg.estimate_pl->region,
                                               cfg.estimate_pl->n_samples, cfg.estimate_pl->seed);
    if (cfg.settling_bound) {
      const PlEstimate margined = with_safety_margin(*report.pl_estimate);
      for (const auto& d : cfg.dynamics) {
        if (d.kind != "fxts") continue;
        BoundEntry b;
        b.dynamics = d.label;
        if (margined.admissible) {
          b.rate_constants = fxts_rate_constants(d.params, margined);
        } else {
          b.note = "cross-derivative bound violated: c >= min(mu1, mu2)/2 on the sampled region";
        }
        report.bounds.push_back(b);
      }
    }
  }

  for (const auto& d : cfg.dynamics) {
    const TangentField field = make_field(d, problem);
    for (std::size_t i = 0; i < starts.size(); ++i) {
      RunResult r;
      r.dynamics = d.label;
      r.init_id = i;
      r.start = starts[i];
      try {
        r.trajectory = integrate(problem, field, cfg.integrator, starts[i]);
      } catch (const DivergenceError& e) {
        if (e.partial()) r.trajectory = *e.partial();
        r.trajectory.reason = Termination::divergence;
        r.error = e.what();
        r.divergence_step = e.step();
        report.diverged = true;
      } catch (const NumericError& e) {
        r.trajectory.reason = Termination::divergence;
        r.error = e.what();
        report.diverged = true;
      }
      for (const auto& rec : r.trajectory.steps) {
        if (rec.dist_sq && *rec.dist_sq < cfg.compare_dist_tol) {
          r.iterations_to_tol = rec.iter;
          break;
        }
      }
      report.runs.push_back(std::move(r));
    }
  }
  return report;
}

std::string trajectory_csv(const Trajectory& traj, Eigen::Index n, Eigen::Index m) {
  std::ostringstream os;
  os << "iter,t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i;
  for (Eigen::Index j = 0; j < m; ++j) os << ",y" << j;
  os << ",grad_norm,value,dist_sq,lyapunov\n";
  for (const auto& r : traj.steps) {
    os << r.iter << ',' << format_double(r.t);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(r.point.x[i]);
    for (Eigen::Index j = 0; j < m; ++j) os << ',' << format_double(r.point.y[j]);
    os << ',' << format_double(r.grad_norm) << ',' << format_double(r.value) << ','
       << opt_cell(r.dist_sq) << ',' << opt_cell(r.lyapunov) << '\n';
  }
  return os.str();
}

std::string comparison_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "dynamics,init_id,iter,dist_sq,grad_norm,lyapunov\n";
  for (const auto& run : report.runs) {
    for (const auto& r : run.trajectory.steps) {
      os << run.dynamics << ',' << run.init_id << ',' << r.iter << ',' << opt_cell(r.dist_sq) << ','
         << format_double(r.grad_norm) << ',' << opt_cell(r.lyapunov) << '\n';
    }
  }
  return os.str();
}

Json to_json(const PlEstimate& est) {
  return {{"mu1_hat", est.mu1_hat},
          {"mu2_hat", est.mu2_hat},
          {"c_hat", est.c_hat},
          {"admissible", est.admissible},
          {"samples_used", est.samples_used},
          {"polish_evaluations", est.polish_evaluations},
          {"region", {est.region.lo, est.region.hi}},
          {"margin", est.margin}};
}

Json to_json(const RateConstants& rc) {
  Json j = {{"alpha1", rc.alpha1}, {"alpha2", rc.alpha2}, {"beta1", rc.beta1},
            {"beta2", rc.beta2},   {"a1", rc.a1},         {"a2", rc.a2},
            {"b1", rc.b1},         {"b2", rc.b2}};
  j["settling_bound"] = num_json(rc.settling_bound());
  return j;
}

Json bound_report(const Json& request) {
  if (!request.is_object()) throw ConfigError("<root>: expected an object");
  for (auto it = request.begin(); it != request.end(); ++it) {
    const auto& k = it.key();
    if (k != "fxts" && k != "mu1" && k != "mu2" && k != "c" && k != "margin") {
      throw ConfigError(k + ": unknown field");
    }
  }
  const auto num = [&request](const char* key, std::optional<double> fallback) {
    if (!request.contains(key)) {
      if (fallback) return *fallback;
      throw ConfigError(std::string(key) + ": required field missing");
    }
    if (!request.at(key).is_number()) throw ConfigError(std::string(key) + ": expected a number");
    return request.at(key).get<double>();
  };
  FxtsParams params = defaults::profile("toy").fxts;
  if (request.contains("fxts")) {
    const Json& f = request.at("fxts");
    if (!f.is_object()) throw ConfigError("fxts: expected an object");
    for (auto it = f.begin(); it != f.end(); ++it) {
      const auto& k = it.key();
      if (!it.value().is_number()) throw ConfigError("fxts." + k + ": expected a number");
      const double v = it.value().get<double>();
      if (k == "c1") {
        params.c1 = v;
      } else if (k == "c2") {
        params.c2 = v;
      } else if (k == "p1") {
        params.p1 = v;
      } else if (k == "p2") {
        params.p2 = v;
      } else if (k == "grad_guard") {
        params.grad_guard = v;
      } else {
        throw ConfigError("fxts." + k + ": unknown field");
      }
    }
  }
  PlEstimate est;
  est.mu1_hat = num("mu1", std::nullopt);
  est.mu2_hat = num("mu2", std::nullopt);
  est.c_hat = num("c", std::nullopt);
  const double margin = num("margin", 0.0);
  try {
    validate(params);
    est = with_safety_margin(est, margin);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  Json j;
  j["fxts"] = {{"c1", params.c1}, {"c2", params.c2}, {"p1", params.p1}, {"p2", params.p2}};
  j["mu1"] = est.mu1_hat;
  j["mu2"] = est.mu2_hat;
  j["c"] = est.c_hat;
  j["margin"] = margin;
  j["admissible"] = est.admissible;
  if (!est.admissible) {
    throw ConfigError("cross-derivative bound violated: c >= min(mu1, mu2)/2");
  }
  j["rate_constants"] = to_json(fxts_rate_constants(params, est));
  return j;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  ExperimentReport report = execute(cfg);
  const auto n = report.runs.empty() ? 0 : report.runs.front().start.n();
  const auto m = report.runs.empty() ? 0 : report.runs.front().start.m();

  if (cfg.write_csv) {
    for (const auto& r : report.runs) {
      const auto path = out_dir / traj_file_name(r);
      write_text_file(path, trajectory_csv(r.trajectory, n, m));
      report.files.push_back(path);
    }
  }
  if (cfg.write_json) {
    if (report.pl_estimate) {
      Json j;
      j["raw"] = to_json(*report.pl_estimate);
      j["margined"] = to_json(with_safety_margin(*report.pl_estimate));
      const auto path = out_dir / "pl_estimate.json";
      write_text_file(path, j.dump(2) + "\n");
      report.files.push_back(path);
    }
    if (cfg.settling_bound) {
      Json arr = Json::array();
      for (const auto& b : report.bounds) {
        Json e;
        e["dynamics"] = b.dynamics;
        e["rate_constants"] = b.rate_constants ? to_json(*b.rate_constants) : Json(nullptr);
        if (!b.note.empty()) e["note"] = b.note;
        arr.push_back(e);
      }
      const auto path = out_dir / "bound.json";
      write_text_file(path, Json{{"margin", kPlSafetyMargin}, {"bounds", arr}}.dump(2) + "\n");
      report.files.push_back(path);
    }
    Json s;
    s["library_version"] = kLibraryVersion;
    s["defaults_version"] = defaults::kVersion;
    s["status"] = report.diverged ? "diverged" : "ok";
    Json runs = Json::array();
    for (const auto& r : report.runs) runs.push_back(run_json(r));
    s["runs"] = runs;
    s["config"] = to_json(cfg);
    const auto path = out_dir / "summary.json";
    write_text_file(path, s.dump(2) + "\n");
    report.files.push_back(path);
  }
  return report;
}

ExperimentReport compare_solvers(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.dynamics.size() < 2) throw ConfigError("dynamics: compare needs at least two entries");
  ExperimentReport report = run_experiment(cfg, out_dir);
  if (cfg.write_csv) {
    const auto path = out_dir / "comparison.csv";
    write_text_file(path, comparison_csv(report));
    report.files.push_back(path);
  }
  if (cfg.write_json) {
    const auto path = out_dir / "comparison.json";
    write_text_file(path, comparison_json(cfg, report).dump(2) + "\n");
    report.files.push_back(path);
  }
  return report;
}

}  // namespace fxts
