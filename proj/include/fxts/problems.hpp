#pragma once

#include "fxts/core.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace fxts {

/// Soft-penalty robust least squares data:
///   F(x, y) = |Ax - y|_M^2 - lambda |y - y0|_M^2,   |v|_M^2 = v^T M v.
/// A is m x n (x in R^n, y and y0 in R^m), M is m x m symmetric PSD, lambda > 1.
struct RlsInstance {
  Matrix A;
  Vector y0;
  Matrix M;
  double lambda = 2.0;
  std::optional<Vector> x_true;
};

/// Throws DimensionError / ParameterError when the instance is malformed.
void validate(const RlsInstance& inst);

/// F(x,y) = x^2 + 3 sin^2(x) sin^2(y) - 4 y^2 - 10 sin^2(y), saddle at (0, 0).
/// Inner oracles are numeric (grid over [-5, 5] plus golden-section polish).
MinMaxProblem make_toy_problem();

MinMaxProblem make_rls_problem(const RlsInstance& inst);

/// Least-norm solution of the joint stationarity system of the RLS objective.
/// Throws NumericError("no stationary point") if that system is inconsistent.
Point rls_saddle_point(const RlsInstance& inst);

/// Rows of A ~ N(0, I_n), x_true ~ N(0, I_n), y0 = A x_true + eps with
/// eps_i ~ N(0, noise_std^2), M = I_m. Draw order: A row-major, then x_true,
/// then eps; see Rng for the generator.
RlsInstance generate_synthetic_rls(int n, int m, double noise_std, double lambda,
                                   std::uint64_t seed);

/// Like generate_synthetic_rls, but A = U diag(singular_values) V^T with Haar
/// orthogonal factors, so the cross-derivative bound 2 sigma_max(A) and the
/// PL moduli are controlled. Requires singular_values.size() == min(n, m).
RlsInstance generate_conditioned_rls(int n, int m, const Vector& singular_values,
                                     double lambda, double y0_scale, std::uint64_t seed);

/// F(x, y) = |x|^2 - |y|^2 on R^n x R^m. Saddle at the origin, PL moduli 2.
MinMaxProblem make_quadratic_fixture(Eigen::Index n = 1, Eigen::Index m = 1);

/// F(x, y) = x^T y on R^n x R^n. Saddle at the origin; no inner oracles
/// (the inner problems are unbounded off the saddle).
MinMaxProblem make_bilinear_fixture(Eigen::Index n = 1);

/// Conditioned 3 x 2 instance used for the fixed-time checks: singular values
/// (3.0, 2.6), lambda = 8, so 2 sigma_max(A) < min(mu1, mu2) / 2 with room
/// for a safety margin.
RlsInstance small_rls_instance();

/// Named fixture: "quadratic", "bilinear" or "small_rls".
MinMaxProblem make_fixture(const std::string& name);

/// Minimization-only objective g: R^n -> R with known optimal value.
struct ScalarObjective {
  std::string name;
  Eigen::Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  double optimum = 0.0;
};

/// g(x) = |Ax - b|^2, gradient 2 A^T (Ax - b), optimum |(I - P) b|^2 with P the
/// orthogonal projector onto range(A).
ScalarObjective make_rank_deficient_ls(const Matrix& A, const Vector& b);

/// Central differences of g.value with step h.
Vector finite_diff_gradient(const ScalarObjective& g, const Vector& x, double h = 1e-6);

// ---------------------------------------------------------------------------
// CSV datasets

class DatasetError : public Error {
 public:
  enum class Kind { missing_file, parse, empty, bad_target };
  DatasetError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class BadRowPolicy {
  skip,   // drop rows with non-numeric or missing cells, count them
  strict  // first bad row is a DatasetError(parse)
};

struct CsvLoadReport {
  bool has_header = false;
  std::vector<std::string> header;
  std::size_t rows_read = 0;
  std::size_t rows_rejected = 0;
  std::vector<std::size_t> rejected_lines;  // 1-based file line numbers
  std::size_t target_index = 0;
};

struct CsvDataset {
  RlsInstance instance;
  CsvLoadReport report;
};

/// Target column by header name or by zero-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

/// Index meaning "the last column".
inline constexpr std::size_t kLastColumn = static_cast<std::size_t>(-1);

/// Comma-separated, '.' decimal point, optional single header row detected by a
/// non-numeric first row. A = all non-target columns, y0 = target, M = I.
CsvDataset load_csv_dataset(const std::filesystem::path& path, const ColumnRef& target,
                            double lambda, BadRowPolicy policy = BadRowPolicy::skip);

/// Writes A's columns followed by y0 as the last column, full round-trip precision.
void write_csv_dataset(const std::filesystem::path& path, const RlsInstance& inst,
                       const std::vector<std::string>& header = {});

namespace detail {

/// Global minimizer of a 1-D function on [lo, hi]: dense grid of grid_points
/// samples, then golden-section search on the bracketing cell down to tol.
double grid_golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                            int grid_points, double tol);

}  // namespace detail

}  // namespace fxts
