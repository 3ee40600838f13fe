#include "fxts/core.hpp"
#include "fxts/random.hpp"

#include <cmath>
#include <numbers>

namespace fxts {

double Point::norm() const { return std::sqrt(x.squaredNorm() + y.squaredNorm()); }

Vector Point::concatenated() const {
  Vector z(x.size() + y.size());
  z << x, y;
  return z;
}

void validate_point(const Point& p) {
  if (p.n() < 1 || p.m() < 1) {
    throw ParameterError("point blocks must be non-empty (n >= 1, m >= 1)");
  }
  if (!p.all_finite()) {
    throw NumericError("point has non-finite entries");
  }
}

double full_grad_norm(const Gradient& g) {
  if (!g.gx.allFinite() || !g.gy.allFinite()) {
    throw NumericError("non-finite gradient");
  }
  return std::sqrt(g.gx.squaredNorm() + g.gy.squaredNorm());
}

double MinMaxProblem::min_over_x(const Vector& y) const {
  if (!inner_min_x) throw ParameterError(name + ": no inner_min_x oracle");
  return value(Point(inner_min_x(y), y));
}

double MinMaxProblem::max_over_y(const Vector& x) const {
  if (!inner_max_y) throw ParameterError(name + ": no inner_max_y oracle");
  return value(Point(x, inner_max_y(x)));
}

Gradient finite_diff_gradient(const MinMaxProblem& problem, const Point& p, double h) {
  if (!(h > 0.0)) throw ParameterError("finite_diff_gradient: step h must be > 0");
  Gradient g{Vector(p.n()), Vector(p.m())};
  Point q = p;
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    const double xi = q.x[i];
    q.x[i] = xi + h;
    const double fp = problem.value(q);
    q.x[i] = xi - h;
    const double fm = problem.value(q);
    q.x[i] = xi;
    g.gx[i] = (fp - fm) / (2.0 * h);
  }
  for (Eigen::Index j = 0; j < p.m(); ++j) {
    const double yj = q.y[j];
    q.y[j] = yj + h;
    const double fp = problem.value(q);
    q.y[j] = yj - h;
    const double fm = problem.value(q);
    q.y[j] = yj;
    g.gy[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::grad_tol: return "grad_tol";
    case Termination::dist_tol: return "dist_tol";
    case Termination::max_steps: return "max_steps";
    case Termination::divergence: return "divergence";
  }
  return "unknown";
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace fxts
