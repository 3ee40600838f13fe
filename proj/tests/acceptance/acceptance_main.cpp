// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances are pinned here, next to each check.

#include "fxts/analysis.hpp"
#include "fxts/defaults.hpp"
#include "fxts/dynamics.hpp"
#include "fxts/experiment.hpp"
#include "fxts/integrators.hpp"
#include "fxts/problems.hpp"
#include "fxts/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace fxts;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Point> random_points(Eigen::Index n, Eigen::Index m, double lo, double hi,
                                 std::size_t count, std::uint64_t seed) {
  return sample_box(n, m, Box{lo, hi}, count, seed);
}

// ---------------------------------------------------------------------------

Outcome settling_formula() {
  constexpr double kTol = 1e-12;
  const double a = settling_time_bound(1, 1, 0.5, 2);
  const double b = settling_time_bound(2, 4, 0.75, 1.5);
  const bool ok = std::abs(a - 3.0) <= kTol && std::abs(b - 2.5) <= kTol;
  return {ok, fmt("T(1,1,0.5,2)=%.17g  T(2,4,0.75,1.5)=%.17g  tol %.0e", a, b, kTol)};
}

Outcome gradient_correctness() {
  constexpr double kRelTol = 1e-5;
  constexpr double kFdStep = 1e-6;
  constexpr std::size_t kPoints = 100;
  // relative error |g - fd| / max(|g|, 1)
  const auto rel = [](const Vector& g, const Vector& fd) {
    return (g - fd).norm() / std::max(g.norm(), 1.0);
  };
  double worst_toy = 0, worst_rls = 0, worst_ls = 0;

  const auto toy = make_toy_problem();
  for (const auto& p : random_points(1, 1, -3, 3, kPoints, 101)) {
    const Gradient g = toy.grad(p);
    const Gradient fd = finite_diff_gradient(toy, p, kFdStep);
    worst_toy = std::max(worst_toy, rel(Point(g.gx, g.gy).concatenated(),
                                        Point(fd.gx, fd.gy).concatenated()));
  }

  Rng rng(202);
  RlsInstance inst;
  inst.A = Matrix(5, 5);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) inst.A(i, j) = rng.normal();
  inst.y0 = Vector(5);
  for (Eigen::Index i = 0; i < 5; ++i) inst.y0[i] = rng.normal();
  inst.M = Matrix::Identity(5, 5);
  inst.lambda = 2.0;
  const auto rls = make_rls_problem(inst);
  for (const auto& p : random_points(5, 5, -3, 3, kPoints, 203)) {
    const Gradient g = rls.grad(p);
    const Gradient fd = finite_diff_gradient(rls, p, kFdStep);
    worst_rls = std::max(worst_rls, rel(Point(g.gx, g.gy).concatenated(),
                                        Point(fd.gx, fd.gy).concatenated()));
  }

  // rank-2 6x4 least squares
  Matrix A(6, 4);
  Rng r2(204);
  Matrix U(6, 2), V(4, 2);
  for (Eigen::Index i = 0; i < U.size(); ++i) U.data()[i] = r2.normal();
  for (Eigen::Index i = 0; i < V.size(); ++i) V.data()[i] = r2.normal();
  A = U * V.transpose();
  Vector b(6);
  for (Eigen::Index i = 0; i < 6; ++i) b[i] = r2.normal();
  const auto ls = make_rank_deficient_ls(A, b);
  Rng r3(205);
  for (std::size_t k = 0; k < kPoints; ++k) {
    Vector x(4);
    for (Eigen::Index i = 0; i < 4; ++i) x[i] = r3.uniform(-3, 3);
    worst_ls = std::max(worst_ls, rel(ls.grad(x), finite_diff_gradient(ls, x, kFdStep)));
  }
  const bool ok = worst_toy <= kRelTol && worst_rls <= kRelTol && worst_ls <= kRelTol;
  return {ok, fmt("max rel err toy %.2e, rls %.2e, ls %.2e (tol %.0e, %zu points each)", worst_toy,
                  worst_rls, worst_ls, kRelTol, kPoints)};
}

Outcome direction_invariance() {
  constexpr double kTol = 1e-12;
  constexpr double kMinGrad = 1e-12;
  constexpr std::size_t kPoints = 1000;
  double worst = 0.0;
  std::size_t used = 0;
  const FxtsParams params = defaults::profile("toy").fxts;
  for (const MinMaxProblem& prob : {make_toy_problem(), make_fixture("small_rls")}) {
    const auto nom = nominal_field(prob);
    const auto fx = fxts_field(prob, params);
    for (const auto& p : random_points(prob.n, prob.m, -3, 3, kPoints, 303)) {
      if (full_grad_norm(prob.grad(p)) <= kMinGrad) continue;
      const Tangent a = nom(p);
      const Tangent b = fx(p);
      const Vector va = Point(a.dx, a.dy).concatenated();
      const Vector vb = Point(b.dx, b.dy).concatenated();
      const double cosine = va.dot(vb) / (va.norm() * vb.norm());
      worst = std::max(worst, std::abs(1.0 - cosine));
      ++used;
    }
  }
  return {worst <= kTol, fmt("max |1 - cos| = %.2e over %zu points (tol %.0e)", worst, used, kTol)};
}

Outcome toy_iterations() {
  constexpr double kDistTol = 1e-4;
  constexpr std::size_t kFxtsBudget = 70;
  constexpr std::size_t kNominalHorizon = 150;
  constexpr std::size_t kRandomInits = 10;
  constexpr std::uint64_t kInitSeed = 3;

  const auto toy = make_toy_problem();
  const auto prof = defaults::profile("toy");
  IntegratorConfig cfg = prof.integrator;
  cfg.max_steps = kNominalHorizon;
  cfg.stop_dist_tol = kDistTol;

  const auto fx = fxts_field(toy, prof.fxts);
  const auto nom = nominal_field(toy);
  const auto iters_to_tol = [&](const TangentField& f, const Point& p0, std::size_t budget) {
    IntegratorConfig c = cfg;
    c.max_steps = budget;
    const auto tr = integrate(toy, f, c, p0);
    return tr.reason == Termination::dist_tol ? std::optional<std::size_t>(tr.iterations)
                                              : std::nullopt;
  };

  bool ok = true;
  std::string detail;
  for (const double s : {2.0, -2.0}) {
    const Point p0(Vector::Constant(1, s), Vector::Constant(1, s));
    const auto a = iters_to_tol(fx, p0, kNominalHorizon);
    const auto b = iters_to_tol(nom, p0, kNominalHorizon);
    ok = ok && a && *a <= kFxtsBudget && !b;
    detail += fmt("(%g,%g): fxts %s, nominal %s; ", s, s, a ? std::to_string(*a).c_str() : "never",
                  b ? std::to_string(*b).c_str() : ">150");
  }
  // Random starts: nominal gets a long budget so both counts are finite.
  std::size_t faster = 0;
  for (const auto& p0 : random_points(1, 1, -3, 3, kRandomInits, kInitSeed)) {
    const auto a = iters_to_tol(fx, p0, 5000);
    const auto b = iters_to_tol(nom, p0, 5000);
    if (a && (!b || *a < *b)) ++faster;
  }
  ok = ok && faster == kRandomInits;
  detail += fmt("fxts faster on %zu/%zu random starts", faster, kRandomInits);
  return {ok, detail};
}

Outcome rls_speedup() {
  constexpr double kMinRatio = 1e3;
  constexpr std::size_t kSkip = 10;
  constexpr double kMonoRelSlack = 1e-12;
  const auto inst = generate_synthetic_rls(50, 25, 0.1, 3.0, 7);
  const auto prob = make_rls_problem(inst);
  const auto prof = defaults::profile("rls");
  IntegratorConfig cfg = prof.integrator;
  cfg.record_every = 1;
  const Point p0(Vector::Zero(50), Vector::Zero(25));
  const auto tf = integrate(prob, fxts_field(prob, prof.fxts), cfg, p0);
  const auto tn = integrate(prob, nominal_field(prob), cfg, p0);
  const double df = *tf.back().dist_sq;
  const double dn = *tn.back().dist_sq;
  bool mono = true;
  for (std::size_t k = kSkip + 1; k < tf.steps.size(); ++k) {
    if (*tf.steps[k].dist_sq > *tf.steps[k - 1].dist_sq * (1.0 + kMonoRelSlack)) mono = false;
  }
  const double ratio = dn / std::max(df, 1e-300);
  return {ratio >= kMinRatio && mono,
          fmt("budget %zu: fxts dist_sq %.3e (%s at %zu), nominal %.3e, ratio %.2e (min %.0e); "
              "monotone after %zu: %s",
              cfg.max_steps, df, to_string(tf.reason), tf.iterations, dn, ratio, kMinRatio, kSkip,
              mono ? "yes" : "no")};
}

Outcome pl_and_growth() {
  constexpr double kSlack = 1e-9;
  constexpr std::size_t kEstSamples = 500;
  constexpr std::size_t kCheckSamples = 200;
  const Box box{-3.0, 3.0};
  bool ok = true;
  std::string detail;
  for (const MinMaxProblem& prob : {make_toy_problem(), make_fixture("small_rls")}) {
    const auto est = with_safety_margin(estimate_pl_constants(prob, box, kEstSamples, 11));
    const auto fresh = sample_box(prob.n, prob.m, box, kCheckSamples, 12);
    std::size_t pl_bad = 0;
    double worst = 1e300;
    for (const auto& p : fresh) {
      const auto r = check_two_sided_pl(prob, p, est.mu1_hat, est.mu2_hat);
      if (!r.holds(kSlack)) ++pl_bad;
      worst = std::min({worst, r.r1, r.r2});
    }
    const auto qg = quadratic_growth_check(prob, fresh, est.mu1_hat, est.mu2_hat, kSlack);
    ok = ok && pl_bad == 0 && qg.violations.empty();
    detail += fmt("%s: mu1 %.5g mu2 %.5g, PL violations %zu (worst %.1e), QG violations %zu; ",
                  prob.name.c_str(), est.mu1_hat, est.mu2_hat, pl_bad, worst, qg.violations.size());
  }
  return {ok, detail};
}

struct SettlingSetup {
  MinMaxProblem problem;
  FxtsParams params;
  double h = 0.0;
  RateConstants rc;
};

SettlingSetup settling_setup() {
  SettlingSetup s;
  s.problem = make_fixture("small_rls");
  const auto prof = defaults::profile("settling");
  s.params = prof.fxts;
  s.h = prof.integrator.step;
  const auto est =
      with_safety_margin(estimate_pl_constants(s.problem, Box{-3.0, 3.0}, 500, 21));
  s.rc = fxts_rate_constants(s.params, est);
  return s;
}

Outcome settling_soundness(const SettlingSetup& s) {
  constexpr double kVTol = 1e-8;
  constexpr std::size_t kStarts = 20;
  constexpr double kMaxStartNorm = 1e3;
  constexpr double kMaxRatio = 5.0;
  const double bound = s.rc.settling_bound();
  const Point& saddle = *s.problem.saddle;
  const double d_max = kMaxStartNorm - saddle.norm();
  const auto field = fxts_field(s.problem, s.params);
  const auto max_steps = static_cast<std::size_t>(std::ceil(1.5 * bound / s.h));

  Rng rng(31);
  double t_min = 1e300, t_max = 0.0;
  bool all_settled = true;
  for (std::size_t i = 0; i < kStarts; ++i) {
    // distances log-spaced over six decades, random directions
    const double d = d_max * std::pow(10.0, -6.0 * static_cast<double>(kStarts - 1 - i) / (kStarts - 1));
    Vector u(s.problem.n + s.problem.m);
    for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = rng.normal();
    u *= d / u.norm();
    const Point p0(saddle.x + u.head(s.problem.n), saddle.y + u.tail(s.problem.m));
    const auto tr = rk4_lyapunov_trace(s.problem, field, p0, s.h, kVTol, max_steps);
    if (!tr.settling_time) {
      all_settled = false;
      continue;
    }
    t_min = std::min(t_min, *tr.settling_time);
    t_max = std::max(t_max, *tr.settling_time);
  }
  const double ratio = t_max / t_min;
  const bool ok = all_settled && t_max <= bound && ratio <= kMaxRatio;
  return {ok, fmt("bound %.4g, empirical settling times in [%.4g, %.4g], max/min %.3g (max %.0f)",
                  bound, t_min, t_max, ratio, kMaxRatio)};
}

Outcome decay_inequality(const SettlingSetup& s) {
  constexpr double kRelSlack = 1e-3;
  constexpr double kMinFraction = 0.99;
  constexpr double kVFloor = 1e-8;
  constexpr std::size_t kTrajectories = 5;
  const auto field = fxts_field(s.problem, s.params);
  const auto max_steps = static_cast<std::size_t>(std::ceil(1.5 * s.rc.settling_bound() / s.h));
  std::size_t checked = 0, satisfied = 0;
  double worst = -1e300;
  for (const auto& p0 : sample_box(s.problem.n, s.problem.m, Box{-3, 3}, kTrajectories, 41)) {
    const auto tr = rk4_lyapunov_trace(s.problem, field, p0, s.h, kVFloor, max_steps);
    const auto dc = check_lyapunov_decay(tr.t, tr.v, s.rc, kRelSlack, kVFloor);
    checked += dc.checked;
    satisfied += dc.satisfied;
    worst = std::max(worst, dc.worst_excess);
  }
  const double frac = checked ? static_cast<double>(satisfied) / static_cast<double>(checked) : 0.0;
  return {frac >= kMinFraction && checked > 0,
          fmt("%zu/%zu grid points satisfy the inequality (%.4f, min %.2f), worst scaled excess %.2e",
              satisfied, checked, frac, kMinFraction, worst)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism_and_schema(const std::filesystem::path& golden_dir,
                               const std::filesystem::path& scratch) {
  const Json j = Json::parse(R"({
    "problem": {"kind": "toy"},
    "dynamics": ["nominal", "fxts"],
    "integrator": {"max_steps": 5},
    "initial_points": {"explicit": [{"x": [2], "y": [2]}],
                       "random": {"count": 2, "box": [-3, 3], "seed": 5}},
    "analysis": {"lyapunov_trace": true}
  })");
  const auto cfg = parse_config(j);
  const auto a = scratch / "a";
  const auto b = scratch / "b";
  std::filesystem::remove_all(scratch);
  const auto ra = compare_solvers(cfg, a);
  compare_solvers(cfg, b);
  std::size_t csvs = 0;
  bool same = true;
  for (const auto& f : ra.files) {
    if (f.extension() != ".csv") continue;
    ++csvs;
    same = same && slurp(f) == slurp(b / f.filename());
  }
  // Golden: header and exact bytes of a tiny run.
  const auto golden = slurp(golden_dir / "golden_traj_fxts_0.csv");
  const auto produced = slurp(a / "traj_fxts_0.csv");
  const bool schema = !golden.empty() && golden == produced;
  return {same && schema && csvs > 0,
          fmt("%zu CSVs byte-identical across reruns: %s; golden trajectory file matches: %s", csvs,
              same ? "yes" : "no", schema ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path golden_dir = argc > 1 ? argv[1] : "tests/data";
  const std::filesystem::path scratch =
      std::filesystem::temp_directory_path() / "fxts_acceptance_scratch";

  struct Item {
    const char* name;
    std::function<Outcome()> run;
  };
  std::optional<SettlingSetup> settling;
  const auto setup = [&]() -> const SettlingSetup& {
    if (!settling) settling = settling_setup();
    return *settling;
  };
  const std::vector<Item> items = {
      {"settling_time_formula", settling_formula},
      {"gradient_correctness", gradient_correctness},
      {"direction_invariance", direction_invariance},
      {"toy_iteration_counts", toy_iterations},
      {"rls_speedup", rls_speedup},
      {"two_sided_pl_and_growth", pl_and_growth},
      {"fixed_time_bound_soundness", [&] { return settling_soundness(setup()); }},
      {"lyapunov_decay_inequality", [&] { return decay_inequality(setup()); }},
      {"determinism_and_schema", [&] { return determinism_and_schema(golden_dir, scratch); }},
  };

  int failures = 0;
  for (const auto& item : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = item.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-28s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", item.name, o.detail.c_str(),
                secs);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(items.size()) - failures, items.size());
  return failures == 0 ? 0 : 1;
}
