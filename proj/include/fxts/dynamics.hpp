#pragma once

#include "fxts/core.hpp"

#include <functional>

namespace fxts {

/// Velocity on Point space, split into the x and y blocks.
struct Tangent {
  Vector dx;
  Vector dy;
};

using TangentField = std::function<Tangent(const Point&)>;

/// Coefficients and exponents of the fixed-time saddle-point field
///
///   z' = (c1 / s^gamma1 + c2 / s^gamma2) * d,   s = |grad F|,  d = (-gx, +gy),
///
/// with gamma_i = (p_i - 2) / (p_i - 1). The field is zero when s <= grad_guard.
/// The defaults are the simplest admissible choice (gamma1 = 1/2, gamma2 = -1);
/// the experiment configs carry their own tuned values.
struct FxtsParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double p1 = 3.0;
  double p2 = 1.5;
  double grad_guard = 1e-12;

  [[nodiscard]] double gamma1() const { return (p1 - 2.0) / (p1 - 1.0); }
  [[nodiscard]] double gamma2() const { return (p2 - 2.0) / (p2 - 1.0); }
};

/// Throws ParameterError naming the first violated constraint
/// (c1 > 0, c2 > 0, p1 > 2, 1 < p2 < 2, grad_guard >= 0).
void validate(const FxtsParams& params);

/// (-gx, +gy): the common direction of both dynamics.
Tangent descent_direction(const Gradient& g);

/// Rescaled direction for an already evaluated gradient. No range checks on
/// params, so limiting configurations (c2 = 0, p1 = 2) are reachable.
Tangent fxts_direction(const Gradient& g, const FxtsParams& params);

/// x' = -grad_x F, y' = +grad_y F.
TangentField nominal_field(const MinMaxProblem& problem);

TangentField fxts_field(const MinMaxProblem& problem, const FxtsParams& params);

}  // namespace fxts
