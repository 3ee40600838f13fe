#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fxts {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error hierarchy. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range parameter or malformed argument.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A NaN or infinity appeared where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A paired state (x, y): x is minimized over, y is maximized over.
struct Point {
  Vector x;
  Vector y;

  Point() = default;
  Point(Vector x_, Vector y_) : x(std::move(x_)), y(std::move(y_)) {}

  [[nodiscard]] Eigen::Index n() const { return x.size(); }
  [[nodiscard]] Eigen::Index m() const { return y.size(); }
  [[nodiscard]] bool all_finite() const { return x.allFinite() && y.allFinite(); }
  /// Euclidean norm of the concatenated state.
  [[nodiscard]] double norm() const;
  [[nodiscard]] Vector concatenated() const;
};

/// Partial gradients (gx = dF/dx, gy = dF/dy).
struct Gradient {
  Vector gx;
  Vector gy;
};

/// Throws ParameterError unless p has n, m >= 1 and only finite entries.
void validate_point(const Point& p);

/// sqrt(|gx|^2 + |gy|^2). Throws NumericError on non-finite input.
double full_grad_norm(const Gradient& g);

/// Known stationary point x̄(y) or ȳ(x) of one block with the other block frozen.
using InnerOracle = std::function<Vector(const Vector&)>;

/// Value and partial-gradient oracles for F(x, y), plus optional closed-form
/// (or numerically solved) auxiliaries used by the analysis routines.
///
/// Oracles must be safe to call concurrently; they capture only immutable state.
struct MinMaxProblem {
  std::string name;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::function<double(const Point&)> value;
  std::function<Gradient(const Point&)> grad;
  std::optional<Point> saddle;
  InnerOracle inner_min_x;  // y -> argmin_x F(x, y)
  InnerOracle inner_max_y;  // x -> argmax_y F(x, y)
  std::map<std::string, double> parameters;

  [[nodiscard]] bool has_inner_oracles() const {
    return static_cast<bool>(inner_min_x) && static_cast<bool>(inner_max_y);
  }
  /// min_x F(., y), evaluated through inner_min_x.
  [[nodiscard]] double min_over_x(const Vector& y) const;
  /// max_y F(x, .), evaluated through inner_max_y.
  [[nodiscard]] double max_over_y(const Vector& x) const;
};

/// Central differences of problem.value per coordinate of x and of y.
Gradient finite_diff_gradient(const MinMaxProblem& problem, const Point& p, double h);

/// Axis-aligned sampling box, identical bounds on every coordinate.
struct Box {
  double lo = -1.0;
  double hi = 1.0;
};

enum class Termination { grad_tol, dist_tol, max_steps, divergence };

const char* to_string(Termination t);

struct TrajectoryRecord {
  std::size_t iter = 0;
  double t = 0.0;
  Point point;
  double grad_norm = 0.0;
  double value = 0.0;
  std::optional<double> dist_sq;
  std::optional<double> lyapunov;
};

struct Trajectory {
  std::vector<TrajectoryRecord> steps;
  Termination reason = Termination::max_steps;
  std::size_t iterations = 0;  // descent steps actually taken

  [[nodiscard]] const TrajectoryRecord& back() const { return steps.back(); }
};

}  // namespace fxts
