#pragma once

#include "fxts/core.hpp"
#include "fxts/dynamics.hpp"
#include "fxts/problems.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fxts {

/// Fraction removed from sampled PL moduli before they feed rate constants.
inline constexpr double kPlSafetyMargin = 0.01;

/// Sampled two-sided PL moduli and cross-derivative bound on a box.
struct PlEstimate {
  double mu1_hat = 0.0;
  double mu2_hat = 0.0;
  double c_hat = 0.0;  // sup of the spectral norm of d/dy grad_x F over the samples
  bool admissible = false;  // c_hat < min(mu1_hat, mu2_hat) / 2
  std::size_t samples_used = 0;
  std::size_t polish_evaluations = 0;
  Box region;
  double margin = 0.0;  // safety margin already applied to mu1_hat, mu2_hat
};

/// c < min(mu1, mu2) / 2, strict.
bool is_admissible(double c, double mu1, double mu2);

/// Copy of est with both moduli scaled by (1 - fraction) and admissibility recomputed.
PlEstimate with_safety_margin(const PlEstimate& est, double fraction = kPlSafetyMargin);

/// Constants of the differential inequality V' <= -a1 V^b1 - a2 V^b2.
struct RateConstants {
  double alpha1 = 0.0, alpha2 = 0.0;
  double beta1 = 0.0, beta2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
  double b1 = 0.0, b2 = 0.0;

  /// settling_time_bound(a1, a2, b1, b2).
  [[nodiscard]] double settling_bound() const;
};

/// 1/(p(1 - alpha)) + 1/(q(beta - 1)) for V' <= -p V^alpha - q V^beta.
/// Requires p, q > 0, 0 < alpha < 1, beta > 1.
double settling_time_bound(double p, double q, double alpha, double beta);

/// alpha_i = c_i (1 - 2c/mu_i), beta_i = 2 - gamma_i, a_i = alpha_i mu^(beta_i/2),
/// b_i = beta_i / 2 with mu = min(mu1, mu2). Throws unless est is admissible.
RateConstants fxts_rate_constants(const FxtsParams& params, const PlEstimate& est);

struct PlResidual {
  double r1 = 0.0;  // |grad_x F|^2 - 2 mu1 (F - min_x F)
  double r2 = 0.0;  // |grad_y F|^2 - 2 mu2 (max_y F - F)
  [[nodiscard]] bool holds(double slack = 1e-9) const { return r1 >= -slack && r2 >= -slack; }
};

PlResidual check_two_sided_pl(const MinMaxProblem& problem, const Point& p, double mu1, double mu2);

struct PlEstimateOptions {
  /// Best samples per block that get a bounded pattern-search polish; 0 disables.
  int polish_starts = 8;
  std::size_t polish_max_evals = 4000;  // per start
  double fd_step = 1e-5;
  double denominator_floor = 1e-10;
  /// Polish iterates also need gap > polish_relative_floor * (1 + |F| + |inner value|).
  double polish_relative_floor = 1e-6;
};

/// Uniform samples in region^(n+m); mu1_hat is the least ratio
/// |grad_x F|^2 / (2 (F - min_x F)) seen over the samples and the polish
/// iterates (denominators <= floor skipped), mu2_hat symmetric, c_hat from
/// estimate_cross_lipschitz over the random samples.
PlEstimate estimate_pl_constants(const MinMaxProblem& problem, const Box& region,
                                 std::size_t n_samples, std::uint64_t seed,
                                 const PlEstimateOptions& opts = {});

/// One-sided version for a minimization objective: least sampled
/// |grad g|^2 / (2 (g - g*)) over region^dim.
double estimate_pl_modulus(const ScalarObjective& g, const Box& region, std::size_t n_samples,
                           std::uint64_t seed, const PlEstimateOptions& opts = {});

/// Largest spectral norm, over samples, of the mixed-derivative matrix formed by
/// central differences of grad_x F with respect to y.
double estimate_cross_lipschitz(const MinMaxProblem& problem, const std::vector<Point>& samples,
                                double fd_step = 1e-5);

struct QgViolation {
  std::size_t sample = 0;
  int block = 1;  // 1: x inequality, 2: y inequality
  double margin = 0.0;
};

struct QgReport {
  std::size_t checked = 0;
  std::vector<QgViolation> violations;
  double worst_margin = 0.0;
};

/// |grad_x F| >= mu1 |x - x̄(y)| and |grad_y F| >= mu2 |y - ȳ(x)| at each sample.
QgReport quadratic_growth_check(const MinMaxProblem& problem, const std::vector<Point>& samples,
                                double mu1, double mu2, double slack = 1e-9);

/// 2 (max_y F(x, .) - min_x F(., y)).
double lyapunov_value(const MinMaxProblem& problem, const Point& p);

/// Squared Euclidean distance of the concatenated states.
double distance_metric(const Point& p, const Point& saddle);

/// Uniform samples in box^(n+m), x block drawn first within each sample.
std::vector<Point> sample_box(Eigen::Index n, Eigen::Index m, const Box& box, std::size_t count,
                              std::uint64_t seed);

struct DecayCheck {
  std::size_t checked = 0;
  std::size_t satisfied = 0;
  double worst_excess = 0.0;  // max of (V' - rhs) / (1 + |V'|)
  [[nodiscard]] double fraction() const {
    return checked ? static_cast<double>(satisfied) / static_cast<double>(checked) : 1.0;
  }
};

/// Central-difference V' at interior samples of (t, v), compared against
/// -a1 v^b1 - a2 v^b2 with slack rel_slack * (1 + |V'|). Samples with v below
/// v_floor (and everything after them) are skipped.
DecayCheck check_lyapunov_decay(const std::vector<double>& t, const std::vector<double>& v,
                                const RateConstants& rc, double rel_slack, double v_floor);

/// V sampled along an RK4 trajectory.
struct LyapunovTrace {
  std::vector<double> t;
  std::vector<double> v;
  std::optional<double> settling_time;  // first t with V <= v_tol
};

/// Integrates field with RK4 step h from p0, evaluating lyapunov_value after
/// every step, until V <= v_tol or max_steps steps were taken.
LyapunovTrace rk4_lyapunov_trace(const MinMaxProblem& problem, const TangentField& field,
                                 const Point& p0, double h, double v_tol, std::size_t max_steps);

}  // namespace fxts
