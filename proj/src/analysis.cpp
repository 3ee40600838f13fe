#include "fxts/analysis.hpp"
#include "fxts/integrators.hpp"
#include "fxts/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fxts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PolishResult {
  double best = kInf;
  std::size_t evals = 0;
};

// Compass search on f restricted to box^dim, from z0. f returns +inf where
// undefined. Terminates when the step falls below 1e-8 of the box width.
PolishResult compass_polish(const std::function<double(const Vector&)>& f, Vector z,
                            const Box& box, std::size_t max_evals) {
  PolishResult res;
  double fz = f(z);
  ++res.evals;
  const double width = box.hi - box.lo;
  double step = 0.1 * width;
  while (step > 1e-8 * width && res.evals < max_evals) {
    bool improved = false;
    for (Eigen::Index i = 0; i < z.size() && res.evals < max_evals; ++i) {
      for (const double sign : {1.0, -1.0}) {
        Vector trial = z;
        trial[i] = std::clamp(trial[i] + sign * step, box.lo, box.hi);
        const double ft = f(trial);
        ++res.evals;
        if (ft < fz) {
          z = std::move(trial);
          fz = ft;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  res.best = fz;
  return res;
}

// Least value of ratio over samples, then polished from the best few samples.
// ratio(z, polishing) applies the stricter polish floor when polishing is set.
PolishResult least_ratio(const std::function<double(const Vector&, bool)>& ratio,
                         const std::vector<Vector>& samples, const Box& box,
                         const PlEstimateOptions& opts) {
  std::vector<double> vals(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) vals[i] = ratio(samples[i], false);
  const auto polished = [&ratio](const Vector& z) { return ratio(z, true); };
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&vals](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  PolishResult res;
  res.best = order.empty() ? kInf : vals[order.front()];
  const auto starts = std::min<std::size_t>(static_cast<std::size_t>(std::max(opts.polish_starts, 0)),
                                            samples.size());
  for (std::size_t k = 0; k < starts; ++k) {
    if (!std::isfinite(vals[order[k]])) break;
    const auto pr = compass_polish(polished, samples[order[k]], box, opts.polish_max_evals);
    res.best = std::min(res.best, pr.best);
    res.evals += pr.evals;
  }
  return res;
}

Point split(const Vector& z, Eigen::Index n) { return Point(z.head(n), z.tail(z.size() - n)); }

}  // namespace

bool is_admissible(double c, double mu1, double mu2) {
  return c >= 0.0 && mu1 > 0.0 && mu2 > 0.0 && c < 0.5 * std::min(mu1, mu2);
}

PlEstimate with_safety_margin(const PlEstimate& est, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw ParameterError("safety margin must lie in [0, 1)");
  }
  PlEstimate out = est;
  out.mu1_hat *= 1.0 - fraction;
  out.mu2_hat *= 1.0 - fraction;
  out.margin = fraction;
  out.admissible = is_admissible(out.c_hat, out.mu1_hat, out.mu2_hat);
  return out;
}

double settling_time_bound(double p, double q, double alpha, double beta) {
  if (!(p > 0.0)) throw ParameterError("settling_time_bound: requires p > 0");
  if (!(q > 0.0)) throw ParameterError("settling_time_bound: requires q > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("settling_time_bound: requires 0 < alpha < 1");
  }
  if (!(beta > 1.0)) throw ParameterError("settling_time_bound: requires beta > 1");
  return 1.0 / (p * (1.0 - alpha)) + 1.0 / (q * (beta - 1.0));
}

double RateConstants::settling_bound() const { return settling_time_bound(a1, a2, b1, b2); }

RateConstants fxts_rate_constants(const FxtsParams& params, const PlEstimate& est) {
  validate(params);
  if (!is_admissible(est.c_hat, est.mu1_hat, est.mu2_hat)) {
    throw ParameterError("cross-derivative bound violated: c >= min(mu1, mu2)/2");
  }
  const double mu = std::min(est.mu1_hat, est.mu2_hat);
  RateConstants rc;
  rc.alpha1 = params.c1 * (1.0 - 2.0 * est.c_hat / est.mu1_hat);
  rc.alpha2 = params.c2 * (1.0 - 2.0 * est.c_hat / est.mu2_hat);
  rc.beta1 = 2.0 - params.gamma1();
  rc.beta2 = 2.0 - params.gamma2();
  rc.a1 = rc.alpha1 * std::pow(mu, rc.beta1 / 2.0);
  rc.a2 = rc.alpha2 * std::pow(mu, rc.beta2 / 2.0);
  rc.b1 = rc.beta1 / 2.0;
  rc.b2 = rc.beta2 / 2.0;
  return rc;
}

PlResidual check_two_sided_pl(const MinMaxProblem& problem, const Point& p, double mu1,
                              double mu2) {
  if (!problem.has_inner_oracles()) {
    throw ParameterError("check_two_sided_pl: problem '" + problem.name + "' has no inner oracles");
  }
  const Gradient g = problem.grad(p);
  const double f = problem.value(p);
  PlResidual r;
  r.r1 = g.gx.squaredNorm() - 2.0 * mu1 * (f - problem.min_over_x(p.y));
  r.r2 = g.gy.squaredNorm() - 2.0 * mu2 * (problem.max_over_y(p.x) - f);
  return r;
}

std::vector<Point> sample_box(Eigen::Index n, Eigen::Index m, const Box& box, std::size_t count,
                              std::uint64_t seed) {
  if (!(box.hi > box.lo)) throw ParameterError("sampling box needs hi > lo");
  Rng rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Point p{Vector(n), Vector(m)};
    for (Eigen::Index i = 0; i < n; ++i) p.x[i] = rng.uniform(box.lo, box.hi);
    for (Eigen::Index j = 0; j < m; ++j) p.y[j] = rng.uniform(box.lo, box.hi);
    out.push_back(std::move(p));
  }
  return out;
}

PlEstimate estimate_pl_constants(const MinMaxProblem& problem, const Box& region,
                                 std::size_t n_samples, std::uint64_t seed,
                                 const PlEstimateOptions& opts) {
  if (!problem.has_inner_oracles()) {
    throw ParameterError("estimate_pl_constants: problem '" + problem.name +
                         "' has no inner oracles");
  }
  if (n_samples < 1) throw ParameterError("estimate_pl_constants: n_samples must be >= 1");
  const auto samples = sample_box(problem.n, problem.m, region, n_samples, seed);
  const Eigen::Index n = problem.n;
  const double floor = opts.denominator_floor;

  // Near a stationary slice the gap is a difference of O(|F|) values, so the
  // polish only trusts gaps well above the rounding level of F.
  const auto gap_floor = [&](bool polishing, double a, double b) {
    return polishing ? std::max(floor, opts.polish_relative_floor * (1.0 + std::abs(a) + std::abs(b)))
                     : floor;
  };
  const auto ratio_x = [&](const Vector& z, bool polishing) {
    const Point p = split(z, n);
    const double f = problem.value(p);
    const double lo = problem.min_over_x(p.y);
    const double gap = f - lo;
    if (!(gap > gap_floor(polishing, f, lo))) return kInf;
    return problem.grad(p).gx.squaredNorm() / (2.0 * gap);
  };
  const auto ratio_y = [&](const Vector& z, bool polishing) {
    const Point p = split(z, n);
    const double f = problem.value(p);
    const double hi = problem.max_over_y(p.x);
    const double gap = hi - f;
    if (!(gap > gap_floor(polishing, f, hi))) return kInf;
    return problem.grad(p).gy.squaredNorm() / (2.0 * gap);
  };

  std::vector<Vector> flat;
  flat.reserve(samples.size());
  for (const auto& p : samples) flat.push_back(p.concatenated());

  const auto rx = least_ratio(ratio_x, flat, region, opts);
  const auto ry = least_ratio(ratio_y, flat, region, opts);
  if (!std::isfinite(rx.best) || !std::isfinite(ry.best)) {
    throw ParameterError("region contains only stationary slices");
  }

  PlEstimate est;
  est.mu1_hat = rx.best;
  est.mu2_hat = ry.best;
  est.c_hat = estimate_cross_lipschitz(problem, samples, opts.fd_step);
  est.admissible = is_admissible(est.c_hat, est.mu1_hat, est.mu2_hat);
  est.samples_used = n_samples;
  est.polish_evaluations = rx.evals + ry.evals;
  est.region = region;
  return est;
}

double estimate_pl_modulus(const ScalarObjective& g, const Box& region, std::size_t n_samples,
                           std::uint64_t seed, const PlEstimateOptions& opts) {
  if (n_samples < 1) throw ParameterError("estimate_pl_modulus: n_samples must be >= 1");
  if (!(region.hi > region.lo)) throw ParameterError("sampling box needs hi > lo");
  Rng rng(seed);
  std::vector<Vector> samples(n_samples, Vector(g.dim));
  for (auto& z : samples) {
    for (Eigen::Index i = 0; i < g.dim; ++i) z[i] = rng.uniform(region.lo, region.hi);
  }
  const auto ratio = [&](const Vector& x, bool polishing) {
    const double v = g.value(x);
    const double gap = v - g.optimum;
    const double fl = polishing ? std::max(opts.denominator_floor,
                                           opts.polish_relative_floor * (1.0 + std::abs(v)))
                                : opts.denominator_floor;
    if (!(gap > fl)) return kInf;
    return g.grad(x).squaredNorm() / (2.0 * gap);
  };
  const auto r = least_ratio(ratio, samples, region, opts);
  if (!std::isfinite(r.best)) throw ParameterError("region contains only stationary slices");
  return r.best;
}

double estimate_cross_lipschitz(const MinMaxProblem& problem, const std::vector<Point>& samples,
                                double fd_step) {
  if (!(fd_step > 0.0)) throw ParameterError("estimate_cross_lipschitz: fd_step must be > 0");
  double worst = 0.0;
  for (const auto& p : samples) {
    Matrix J(p.n(), p.m());
    Point q = p;
    for (Eigen::Index j = 0; j < p.m(); ++j) {
      const double yj = q.y[j];
      q.y[j] = yj + fd_step;
      const Vector gp = problem.grad(q).gx;
      q.y[j] = yj - fd_step;
      const Vector gm = problem.grad(q).gx;
      q.y[j] = yj;
      J.col(j) = (gp - gm) / (2.0 * fd_step);
    }
    if (!J.allFinite()) throw NumericError("estimate_cross_lipschitz: non-finite differences");
    const double norm = Eigen::JacobiSVD<Matrix>(J).singularValues()(0);
    worst = std::max(worst, norm);
  }
  return worst;
}

QgReport quadratic_growth_check(const MinMaxProblem& problem, const std::vector<Point>& samples,
                                double mu1, double mu2, double slack) {
  if (!problem.has_inner_oracles()) {
    throw ParameterError("quadratic_growth_check: problem '" + problem.name +
                         "' has no inner oracles");
  }
  QgReport report;
  report.worst_margin = kInf;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Point& p = samples[k];
    const Gradient g = problem.grad(p);
    const double m1 = g.gx.norm() - mu1 * (p.x - problem.inner_min_x(p.y)).norm();
    const double m2 = g.gy.norm() - mu2 * (p.y - problem.inner_max_y(p.x)).norm();
    if (m1 < -slack) report.violations.push_back({k, 1, m1});
    if (m2 < -slack) report.violations.push_back({k, 2, m2});
    report.worst_margin = std::min({report.worst_margin, m1, m2});
    ++report.checked;
  }
  if (report.checked == 0) report.worst_margin = 0.0;
  return report;
}

double lyapunov_value(const MinMaxProblem& problem, const Point& p) {
  if (!problem.has_inner_oracles()) {
    throw ParameterError("lyapunov_value: problem '" + problem.name + "' has no inner oracles");
  }
  // Exact arithmetic gives >= 0; clamp the rounding residue of the inner solves.
  return std::max(0.0, 2.0 * (problem.max_over_y(p.x) - problem.min_over_x(p.y)));
}

double distance_metric(const Point& p, const Point& saddle) {
  if (p.n() != saddle.n() || p.m() != saddle.m()) {
    throw DimensionError("distance_metric: dimension mismatch");
  }
  return (p.x - saddle.x).squaredNorm() + (p.y - saddle.y).squaredNorm();
}

DecayCheck check_lyapunov_decay(const std::vector<double>& t, const std::vector<double>& v,
                                const RateConstants& rc, double rel_slack, double v_floor) {
  if (t.size() != v.size()) throw DimensionError("check_lyapunov_decay: t and v differ in length");
  DecayCheck out;
  out.worst_excess = -kInf;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i + 1] <= v_floor) break;
    const double vdot = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
    const double rhs = -rc.a1 * std::pow(v[i], rc.b1) - rc.a2 * std::pow(v[i], rc.b2);
    const double excess = vdot - rhs;
    ++out.checked;
    if (excess <= rel_slack * (1.0 + std::abs(vdot))) ++out.satisfied;
    out.worst_excess = std::max(out.worst_excess, excess / (1.0 + std::abs(vdot)));
  }
  if (out.checked == 0) out.worst_excess = 0.0;
  return out;
}

LyapunovTrace rk4_lyapunov_trace(const MinMaxProblem& problem, const TangentField& field,
                                 const Point& p0, double h, double v_tol, std::size_t max_steps) {
  if (!(h > 0.0)) throw ParameterError("rk4_lyapunov_trace: h must be > 0");
  LyapunovTrace out;
  Point p = p0;
  double v = lyapunov_value(problem, p);
  out.t.push_back(0.0);
  out.v.push_back(v);
  for (std::size_t k = 1; v > v_tol && k <= max_steps; ++k) {
    p = rk4_step(field, p, h, k - 1);
    v = lyapunov_value(problem, p);
    out.t.push_back(static_cast<double>(k) * h);
    out.v.push_back(v);
  }
  if (v <= v_tol) out.settling_time = out.t.back();
  return out;
}

}  // namespace fxts
