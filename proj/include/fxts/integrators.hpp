#pragma once

#include "fxts/core.hpp"
#include "fxts/dynamics.hpp"

#include <memory>
#include <optional>

namespace fxts {

/// Thrown when an iterate stops being finite or leaves the ball of radius
/// kDivergenceRadius. partial() holds the trajectory recorded so far, when the
/// error came out of integrate().
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : Error("divergence detected at step " + std::to_string(step) + ": " + what), step_(step) {}

  [[nodiscard]] std::size_t step() const { return step_; }
  [[nodiscard]] const Trajectory* partial() const { return partial_.get(); }
  void attach(Trajectory t) { partial_ = std::make_shared<Trajectory>(std::move(t)); }

 private:
  std::size_t step_;
  std::shared_ptr<Trajectory> partial_;
};

inline constexpr double kDivergenceRadius = 1e12;

enum class Scheme { euler, euler_timescale, rk4 };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct IntegratorConfig {
  Scheme scheme = Scheme::euler;
  double step = 1e-2;
  int ascent_ratio = 1;           // euler_timescale only
  std::size_t max_steps = 1000;   // outer (descent) iterations
  double stop_grad_tol = 0.0;     // stop once |grad F| <= tol
  std::optional<double> stop_dist_tol;  // stop once dist_sq <= tol (needs a known saddle)
  std::size_t record_every = 1;
  bool record_lyapunov = false;   // needs inner oracles
};

void validate(const IntegratorConfig& cfg);

/// p + h * field(p), both blocks at once.
Point euler_step(const TangentField& field, const Point& p, double h, std::size_t step_index = 0);

/// k ascent substeps on y with x frozen, then one descent step on x using the
/// final y. Each substep re-evaluates the field at the current iterate.
Point euler_timescale_step(const TangentField& field, const Point& p, double h, int ascent_ratio,
                           std::size_t step_index = 0);

/// Classical four-stage Runge-Kutta on the concatenated state.
Point rk4_step(const TangentField& field, const Point& p, double h, std::size_t step_index = 0);

/// Runs the configured scheme from p0. Records iteration 0, every record_every
/// iterations, and the terminal iterate. Stop rules are tested before each
/// step in the order grad_tol, dist_tol, max_steps.
/// Throws DivergenceError carrying the partial trajectory.
Trajectory integrate(const MinMaxProblem& problem, const TangentField& field,
                     const IntegratorConfig& cfg, const Point& p0);

}  // namespace fxts
