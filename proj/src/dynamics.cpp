#include "fxts/dynamics.hpp"

#include <cmath>

namespace fxts {

void validate(const FxtsParams& params) {
  if (!(params.c1 > 0.0)) throw ParameterError("FxtsParams: c1 must be > 0");
  if (!(params.c2 > 0.0)) throw ParameterError("FxtsParams: c2 must be > 0");
  if (!(params.p1 > 2.0)) throw ParameterError("FxtsParams: p1 must be > 2");
  if (!(params.p2 > 1.0 && params.p2 < 2.0)) {
    throw ParameterError("FxtsParams: p2 must satisfy 1 < p2 < 2");
  }
  if (!(params.grad_guard >= 0.0)) throw ParameterError("FxtsParams: grad_guard must be >= 0");
}

Tangent descent_direction(const Gradient& g) { return Tangent{-g.gx, g.gy}; }

Tangent fxts_direction(const Gradient& g, const FxtsParams& params) {
  const double s = full_grad_norm(g);
  if (s <= params.grad_guard || s == 0.0) {
    return Tangent{Vector::Zero(g.gx.size()), Vector::Zero(g.gy.size())};
  }
  const double scale =
      params.c1 * std::pow(s, -params.gamma1()) + params.c2 * std::pow(s, -params.gamma2());
  return Tangent{-scale * g.gx, scale * g.gy};
}

TangentField nominal_field(const MinMaxProblem& problem) {
  return [grad = problem.grad](const Point& p) {
    const Gradient g = grad(p);
    if (!g.gx.allFinite() || !g.gy.allFinite()) throw NumericError("non-finite gradient");
    return descent_direction(g);
  };
}

TangentField fxts_field(const MinMaxProblem& problem, const FxtsParams& params) {
  validate(params);
  return [grad = problem.grad, params](const Point& p) {
    return fxts_direction(grad(p), params);
  };
}

}  // namespace fxts
