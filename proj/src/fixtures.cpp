#include "fxts/problems.hpp"

namespace fxts {

MinMaxProblem make_quadratic_fixture(Eigen::Index n, Eigen::Index m) {
  if (n < 1 || m < 1) throw DimensionError("quadratic fixture needs n, m >= 1");
  MinMaxProblem p;
  p.name = "quadratic";
  p.n = n;
  p.m = m;
  p.value = [](const Point& q) { return q.x.squaredNorm() - q.y.squaredNorm(); };
  p.grad = [](const Point& q) { return Gradient{2.0 * q.x, -2.0 * q.y}; };
  p.saddle = Point(Vector::Zero(n), Vector::Zero(m));
  p.inner_min_x = [n](const Vector&) { return Vector(Vector::Zero(n)); };
  p.inner_max_y = [m](const Vector&) { return Vector(Vector::Zero(m)); };
  return p;
}

MinMaxProblem make_bilinear_fixture(Eigen::Index n) {
  if (n < 1) throw DimensionError("bilinear fixture needs n >= 1");
  MinMaxProblem p;
  p.name = "bilinear";
  p.n = n;
  p.m = n;
  p.value = [](const Point& q) { return q.x.dot(q.y); };
  p.grad = [](const Point& q) { return Gradient{q.y, q.x}; };
  p.saddle = Point(Vector::Zero(n), Vector::Zero(n));
  return p;
}

RlsInstance small_rls_instance() {
  Vector sv(2);
  sv << 3.0, 2.6;
  return generate_conditioned_rls(2, 3, sv, 8.0, 0.3, 20240611);
}

MinMaxProblem make_fixture(const std::string& name) {
  if (name == "quadratic") return make_quadratic_fixture();
  if (name == "bilinear") return make_bilinear_fixture();
  if (name == "small_rls") {
    MinMaxProblem p = make_rls_problem(small_rls_instance());
    p.name = "small_rls";
    return p;
  }
  throw ParameterError("unknown fixture '" + name + "'");
}

}  // namespace fxts
