#include "fxts/problems.hpp"
#include "fxts/random.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace fxts {

namespace {

// Inner-solver resolution for the toy problem.
constexpr double kToyInnerLo = -5.0;
constexpr double kToyInnerHi = 5.0;
constexpr int kToyInnerGrid = 10001;
constexpr double kToyInnerTol = 1e-10;

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;

double toy_value(double x, double y) {
  const double sx = std::sin(x);
  const double sy = std::sin(y);
  return x * x + 3.0 * sx * sx * sy * sy - 4.0 * y * y - 10.0 * sy * sy;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

namespace detail {

double grid_golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                            int grid_points, double tol) {
  if (!(hi > lo) || grid_points < 3) {
    throw ParameterError("grid_golden_minimize: need hi > lo and grid_points >= 3");
  }
  const double dx = (hi - lo) / (grid_points - 1);
  int best = 0;
  double best_f = f(lo);
  for (int i = 1; i < grid_points; ++i) {
    const double fi = f(lo + dx * i);
    if (fi < best_f) {
      best_f = fi;
      best = i;
    }
  }
  double a = lo + dx * std::max(best - 1, 0);
  double b = lo + dx * std::min(best + 1, grid_points - 1);
  const double best_x = lo + dx * best;

  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // The polish only ever narrows a grid cell; never return something worse than
  // the grid point it started from.
  return f(mid) <= best_f ? mid : best_x;
}

}  // namespace detail

MinMaxProblem make_toy_problem() {
  MinMaxProblem p;
  p.name = "toy";
  p.n = 1;
  p.m = 1;
  p.value = [](const Point& q) { return toy_value(q.x[0], q.y[0]); };
  p.grad = [](const Point& q) {
    const double x = q.x[0];
    const double y = q.y[0];
    const double sx = std::sin(x);
    const double sy = std::sin(y);
    const double gx = 2.0 * x + 3.0 * std::sin(2.0 * x) * sy * sy;
    const double gy = 3.0 * sx * sx * std::sin(2.0 * y) - 8.0 * y - 10.0 * std::sin(2.0 * y);
    return Gradient{scalar(gx), scalar(gy)};
  };
  p.saddle = Point(Vector::Zero(1), Vector::Zero(1));
  p.inner_min_x = [](const Vector& y) {
    const double yv = y[0];
    return scalar(detail::grid_golden_minimize([yv](double x) { return toy_value(x, yv); },
                                               kToyInnerLo, kToyInnerHi, kToyInnerGrid,
                                               kToyInnerTol));
  };
  p.inner_max_y = [](const Vector& x) {
    const double xv = x[0];
    return scalar(detail::grid_golden_minimize([xv](double y) { return -toy_value(xv, y); },
                                               kToyInnerLo, kToyInnerHi, kToyInnerGrid,
                                               kToyInnerTol));
  };
  return p;
}

void validate(const RlsInstance& inst) {
  const auto m = inst.A.rows();
  const auto n = inst.A.cols();
  if (n < 1 || m < 1) throw DimensionError("RLS: A must be non-empty");
  if (inst.y0.size() != m) throw DimensionError("RLS: y0 length must equal rows of A");
  if (inst.M.rows() != m || inst.M.cols() != m) {
    throw DimensionError("RLS: M must be m x m where m = rows of A");
  }
  if (inst.x_true && inst.x_true->size() != n) {
    throw DimensionError("RLS: x_true length must equal columns of A");
  }
  if (!inst.A.allFinite() || !inst.y0.allFinite() || !inst.M.allFinite()) {
    throw NumericError("RLS: non-finite data");
  }
  if (!(inst.lambda > 1.0)) throw ParameterError("two-sided PL requires lambda > 1");
  if ((inst.M - inst.M.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw ParameterError("RLS: M must be symmetric");
  }
  if (!inst.M.isIdentity(0.0)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(inst.M, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kPsdTol) {
      throw ParameterError("RLS: M must be positive semi-definite");
    }
  }
}

namespace {

double m_norm_sq(const Matrix& M, const Vector& v) { return v.dot(M * v); }

}  // namespace

Point rls_saddle_point(const RlsInstance& inst) {
  validate(inst);
  const auto n = inst.A.cols();
  const auto m = inst.A.rows();
  const Matrix MA = inst.M * inst.A;
  // [ 2 A'MA    -2 A'M      ] [x]   [      0      ]
  // [ -2 MA     2(1-l) M    ] [y] = [ -2 l M y0   ]
  Matrix K(n + m, n + m);
  K.topLeftCorner(n, n) = 2.0 * inst.A.transpose() * MA;
  K.topRightCorner(n, m) = -2.0 * MA.transpose();
  K.bottomLeftCorner(m, n) = -2.0 * MA;
  K.bottomRightCorner(m, m) = 2.0 * (1.0 - inst.lambda) * inst.M;
  Vector rhs = Vector::Zero(n + m);
  rhs.tail(m) = -2.0 * inst.lambda * (inst.M * inst.y0);

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
  const Vector z = cod.solve(rhs);
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff() * std::max(1.0, z.norm()));
  if (!z.allFinite() || (K * z - rhs).norm() > 1e-9 * (scale + rhs.norm())) {
    throw NumericError("no stationary point");
  }
  return Point(z.head(n), z.tail(m));
}

MinMaxProblem make_rls_problem(const RlsInstance& inst) {
  validate(inst);
  struct Data {
    Matrix A, M, MA, AtM;
    Vector y0;
    double lambda;
    Eigen::CompleteOrthogonalDecomposition<Matrix> x_solver;  // A'MA
    Eigen::CompleteOrthogonalDecomposition<Matrix> y_solver;  // (1 - lambda) M
  };
  auto d = std::make_shared<Data>();
  d->A = inst.A;
  d->M = inst.M;
  d->MA = inst.M * inst.A;
  d->AtM = d->MA.transpose();
  d->y0 = inst.y0;
  d->lambda = inst.lambda;
  d->x_solver.compute(d->AtM * d->A);
  d->y_solver.compute((1.0 - inst.lambda) * inst.M);
  std::shared_ptr<const Data> data = d;

  MinMaxProblem p;
  p.name = "rls";
  p.n = inst.A.cols();
  p.m = inst.A.rows();
  p.parameters = {{"lambda", inst.lambda},
                  {"n", static_cast<double>(p.n)},
                  {"m", static_cast<double>(p.m)}};
  p.value = [data](const Point& q) {
    const Vector r = data->A * q.x - q.y;
    const Vector e = q.y - data->y0;
    return m_norm_sq(data->M, r) - data->lambda * m_norm_sq(data->M, e);
  };
  p.grad = [data](const Point& q) {
    const Vector r = data->A * q.x - q.y;
    Gradient g;
    g.gx = 2.0 * (data->AtM * r);
    g.gy = -2.0 * (data->M * r) - 2.0 * data->lambda * (data->M * (q.y - data->y0));
    return g;
  };
  p.inner_min_x = [data](const Vector& y) -> Vector {
    return data->x_solver.solve(data->AtM * y);
  };
  p.inner_max_y = [data](const Vector& x) -> Vector {
    return data->y_solver.solve(data->M * (data->A * x - data->lambda * data->y0));
  };
  p.saddle = rls_saddle_point(inst);
  return p;
}

RlsInstance generate_synthetic_rls(int n, int m, double noise_std, double lambda,
                                   std::uint64_t seed) {
  if (n < 1 || m < 1) throw ParameterError("generate_synthetic_rls: n, m must be >= 1");
  if (!(noise_std >= 0.0)) throw ParameterError("generate_synthetic_rls: noise_std must be >= 0");
  Rng rng(seed);
  RlsInstance inst;
  inst.A.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) inst.A(i, j) = rng.normal();
  }
  Vector x_true(n);
  for (int j = 0; j < n; ++j) x_true[j] = rng.normal();
  Vector eps(m);
  for (int i = 0; i < m; ++i) eps[i] = noise_std * rng.normal();
  inst.y0 = inst.A * x_true + eps;
  inst.M = Matrix::Identity(m, m);
  inst.lambda = lambda;
  inst.x_true = std::move(x_true);
  return inst;
}

namespace {

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs of
// R's diagonal folded into Q.
Matrix random_orthogonal(int k, Rng& rng) {
  Matrix G(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) G(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

}  // namespace

RlsInstance generate_conditioned_rls(int n, int m, const Vector& singular_values,
                                     double lambda, double y0_scale, std::uint64_t seed) {
  if (n < 1 || m < 1) throw ParameterError("generate_conditioned_rls: n, m must be >= 1");
  const int k = std::min(n, m);
  if (singular_values.size() != k) {
    throw DimensionError("generate_conditioned_rls: need min(n, m) singular values");
  }
  if ((singular_values.array() < 0.0).any()) {
    throw ParameterError("generate_conditioned_rls: singular values must be >= 0");
  }
  Rng rng(seed);
  const Matrix U = random_orthogonal(m, rng);
  const Matrix V = random_orthogonal(n, rng);
  RlsInstance inst;
  inst.A = U.leftCols(k) * singular_values.asDiagonal() * V.leftCols(k).transpose();
  inst.y0.resize(m);
  for (int i = 0; i < m; ++i) inst.y0[i] = y0_scale * rng.normal();
  inst.M = Matrix::Identity(m, m);
  inst.lambda = lambda;
  validate(inst);
  return inst;
}

ScalarObjective make_rank_deficient_ls(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) throw DimensionError("make_rank_deficient_ls: rows(A) != len(b)");
  if (A.cols() < 1) throw DimensionError("make_rank_deficient_ls: A has no columns");
  auto Ap = std::make_shared<const Matrix>(A);
  auto bp = std::make_shared<const Vector>(b);
  ScalarObjective g;
  g.name = "least_squares";
  g.dim = A.cols();
  g.value = [Ap, bp](const Vector& x) { return (*Ap * x - *bp).squaredNorm(); };
  g.grad = [Ap, bp](const Vector& x) -> Vector {
    return 2.0 * (Ap->transpose() * (*Ap * x - *bp));
  };
  const Vector x_ls = A.completeOrthogonalDecomposition().solve(b);
  g.optimum = (A * x_ls - b).squaredNorm();
  return g;
}

Vector finite_diff_gradient(const ScalarObjective& g, const Vector& x, double h) {
  if (!(h > 0.0)) throw ParameterError("finite_diff_gradient: step h must be > 0");
  if (x.size() != g.dim) throw DimensionError("finite_diff_gradient: point has wrong dimension");
  Vector out(x.size());
  Vector z = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = z[i];
    z[i] = xi + h;
    const double fp = g.value(z);
    z[i] = xi - h;
    const double fm = g.value(z);
    z[i] = xi;
    out[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

}  // namespace fxts
