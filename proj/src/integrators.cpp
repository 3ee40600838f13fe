#include "fxts/integrators.hpp"

#include "fxts/analysis.hpp"

#include <cmath>

namespace fxts {

namespace {

void check_iterate(const Point& p, std::size_t step_index) {
  if (!p.all_finite()) throw DivergenceError(step_index, "non-finite coordinate");
  if (p.norm() > kDivergenceRadius) throw DivergenceError(step_index, "|(x, y)| exceeded 1e12");
}

void check_step(double h) {
  if (!(h > 0.0)) throw ParameterError("integrator step h must be > 0");
}

Tangent eval_field(const TangentField& field, const Point& p, std::size_t step_index) {
  Tangent v = field(p);
  if (!v.dx.allFinite() || !v.dy.allFinite()) {
    throw DivergenceError(step_index, "non-finite field value");
  }
  return v;
}

}  // namespace

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::euler: return "euler";
    case Scheme::euler_timescale: return "euler_timescale";
    case Scheme::rk4: return "rk4";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "euler") return Scheme::euler;
  if (s == "euler_timescale") return Scheme::euler_timescale;
  if (s == "rk4") return Scheme::rk4;
  throw ParameterError("unknown integrator scheme '" + s + "'");
}

void validate(const IntegratorConfig& cfg) {
  check_step(cfg.step);
  if (cfg.ascent_ratio < 1) throw ParameterError("ascent_ratio must be >= 1");
  if (cfg.record_every < 1) throw ParameterError("record_every must be >= 1");
  if (!(cfg.stop_grad_tol >= 0.0)) throw ParameterError("stop_grad_tol must be >= 0");
  if (cfg.stop_dist_tol && !(*cfg.stop_dist_tol >= 0.0)) {
    throw ParameterError("stop_dist_tol must be >= 0");
  }
}

Point euler_step(const TangentField& field, const Point& p, double h, std::size_t step_index) {
  check_step(h);
  const Tangent v = eval_field(field, p, step_index);
  Point next(p.x + h * v.dx, p.y + h * v.dy);
  check_iterate(next, step_index);
  return next;
}

Point euler_timescale_step(const TangentField& field, const Point& p, double h, int ascent_ratio,
                           std::size_t step_index) {
  check_step(h);
  if (ascent_ratio < 1) throw ParameterError("ascent_ratio must be >= 1");
  Point q = p;
  for (int k = 0; k < ascent_ratio; ++k) {
    q.y += h * eval_field(field, q, step_index).dy;
    check_iterate(q, step_index);
  }
  q.x += h * eval_field(field, q, step_index).dx;
  check_iterate(q, step_index);
  return q;
}

Point rk4_step(const TangentField& field, const Point& p, double h, std::size_t step_index) {
  check_step(h);
  const auto shifted = [&p](const Tangent& v, double a) {
    return Point(p.x + a * v.dx, p.y + a * v.dy);
  };
  const Tangent k1 = eval_field(field, p, step_index);
  const Tangent k2 = eval_field(field, shifted(k1, 0.5 * h), step_index);
  const Tangent k3 = eval_field(field, shifted(k2, 0.5 * h), step_index);
  const Tangent k4 = eval_field(field, shifted(k3, h), step_index);
  Point next(p.x + (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
             p.y + (h / 6.0) * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy));
  check_iterate(next, step_index);
  return next;
}

Trajectory integrate(const MinMaxProblem& problem, const TangentField& field,
                     const IntegratorConfig& cfg, const Point& p0) {
  validate(cfg);
  validate_point(p0);
  if (p0.n() != problem.n || p0.m() != problem.m) {
    throw DimensionError("integrate: initial point dimensions do not match the problem");
  }
  if (cfg.stop_dist_tol && !problem.saddle) {
    throw ParameterError("stop_dist_tol requires a problem with a known saddle point");
  }
  if (cfg.record_lyapunov && !problem.has_inner_oracles()) {
    throw ParameterError("record_lyapunov requires inner oracles");
  }

  Trajectory traj;
  Point p = p0;
  std::size_t last_recorded = 0;
  bool have_record = false;

  const auto make_record = [&](std::size_t iter, double grad_norm) {
    TrajectoryRecord r;
    r.iter = iter;
    r.t = static_cast<double>(iter) * cfg.step;
    r.point = p;
    r.grad_norm = grad_norm;
    r.value = problem.value(p);
    if (problem.saddle) r.dist_sq = distance_metric(p, *problem.saddle);
    if (cfg.record_lyapunov) r.lyapunov = lyapunov_value(problem, p);
    return r;
  };

  for (std::size_t iter = 0;; ++iter) {
    const double s = full_grad_norm(problem.grad(p));
    std::optional<Termination> stop;
    if (s <= cfg.stop_grad_tol) {
      stop = Termination::grad_tol;
    } else if (cfg.stop_dist_tol && distance_metric(p, *problem.saddle) <= *cfg.stop_dist_tol) {
      stop = Termination::dist_tol;
    } else if (iter >= cfg.max_steps) {
      stop = Termination::max_steps;
    }

    if (stop || iter % cfg.record_every == 0) {
      if (!have_record || last_recorded != iter) {
        traj.steps.push_back(make_record(iter, s));
        last_recorded = iter;
        have_record = true;
      }
    }
    if (stop) {
      traj.reason = *stop;
      traj.iterations = iter;
      return traj;
    }

    try {
      switch (cfg.scheme) {
        case Scheme::euler: p = euler_step(field, p, cfg.step, iter); break;
        case Scheme::euler_timescale:
          p = euler_timescale_step(field, p, cfg.step, cfg.ascent_ratio, iter);
          break;
        case Scheme::rk4: p = rk4_step(field, p, cfg.step, iter); break;
      }
    } catch (DivergenceError& e) {
      traj.reason = Termination::divergence;
      traj.iterations = iter;
      e.attach(std::move(traj));
      throw;
    }
  }
}

}  // namespace fxts
