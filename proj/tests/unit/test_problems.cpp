#include "fxts/analysis.hpp"
#include "fxts/problems.hpp"
#include "fxts/random.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fxts;
using fxts::testing::pt;
using fxts::testing::vec;

namespace {

RlsInstance scalar_instance() {
  RlsInstance inst;
  inst.A = Matrix::Identity(1, 1);
  inst.y0 = vec({1.0});
  inst.M = Matrix::Identity(1, 1);
  inst.lambda = 3.0;
  return inst;
}

RlsInstance random_instance(int m, int n, double lambda, std::uint64_t seed) {
  Rng r(seed);
  RlsInstance inst;
  inst.A = Matrix(m, n);
  for (Eigen::Index i = 0; i < inst.A.size(); ++i) inst.A.data()[i] = r.normal();
  inst.y0 = Vector(m);
  for (Eigen::Index i = 0; i < m; ++i) inst.y0[i] = r.normal();
  inst.M = Matrix::Identity(m, m);
  inst.lambda = lambda;
  return inst;
}

}  // namespace

// ---------------------------------------------------------------------------
// toy

TEST(Toy, ValueAndGradientAtOrigin) {
  const auto toy = make_toy_problem();
  EXPECT_EQ(toy.value(pt(0, 0)), 0.0);
  const Gradient g = toy.grad(pt(0, 0));
  EXPECT_EQ(g.gx[0], 0.0);
  EXPECT_EQ(g.gy[0], 0.0);
  ASSERT_TRUE(toy.saddle);
  EXPECT_EQ(toy.saddle->x[0], 0.0);
  EXPECT_EQ(toy.saddle->y[0], 0.0);
}

TEST(Toy, ValueFormula) {
  const auto toy = make_toy_problem();
  const double x = 0.7, y = -1.3;
  const double sx = std::sin(x), sy = std::sin(y);
  EXPECT_DOUBLE_EQ(toy.value(pt(x, y)), x * x + 3 * sx * sx * sy * sy - 4 * y * y - 10 * sy * sy);
}

TEST(Toy, InnerMaxAtOneIsZero) {
  const auto toy = make_toy_problem();
  EXPECT_NEAR(toy.inner_max_y(vec({1.0}))[0], 0.0, 1e-8);
}

TEST(Toy, EvenSymmetry) {
  const auto toy = make_toy_problem();
  for (const auto& p : sample_box(1, 1, Box{-4, 4}, 200, 3)) {
    EXPECT_NEAR(toy.value(p), toy.value(Point(-p.x, -p.y)), 1e-12);
  }
}

// Analytic oracle: for fixed x, F is maximized at y = 0 (so max_y F = x^2);
// for fixed y, F is minimized at x = 0 (so min_x F = -4y^2 - 10 sin^2 y).
TEST(Toy, NumericInnerSolversMatchClosedForm) {
  const auto toy = make_toy_problem();
  Rng r(11);
  for (int k = 0; k < 50; ++k) {
    const double x = r.uniform(-4, 4);
    const double y = r.uniform(-4, 4);
    EXPECT_NEAR(toy.max_over_y(vec({x})), x * x, 1e-6) << "x=" << x;
    const double sy = std::sin(y);
    EXPECT_NEAR(toy.min_over_x(vec({y})), -4 * y * y - 10 * sy * sy, 1e-6) << "y=" << y;
  }
}

TEST(GridGolden, FindsGlobalMinimumOfMultimodalFunction) {
  // global minimum of x^2/10 + sin(3x) on [-5, 5]
  const auto f = [](double x) { return x * x / 10 + std::sin(3 * x); };
  const double x = detail::grid_golden_minimize(f, -5, 5, 10001, 1e-12);
  // derivative x/5 + 3 cos(3x) = 0 near -0.5138
  EXPECT_NEAR(x / 5 + 3 * std::cos(3 * x), 0.0, 1e-7);
  for (double t = -5; t <= 5; t += 0.001) EXPECT_LE(f(x), f(t) + 1e-12);
}

// ---------------------------------------------------------------------------
// RLS

TEST(Rls, OriginExample) {
  RlsInstance inst;
  inst.A = Matrix::Identity(2, 2);
  inst.y0 = Vector::Zero(2);
  inst.M = Matrix::Identity(2, 2);
  inst.lambda = 3.0;
  const auto p = make_rls_problem(inst);
  const Point o(Vector::Zero(2), Vector::Zero(2));
  EXPECT_EQ(p.value(o), 0.0);
  EXPECT_EQ(full_grad_norm(p.grad(o)), 0.0);
}

TEST(Rls, ScalarSaddleIsOneOne) {
  const Point s = rls_saddle_point(scalar_instance());
  EXPECT_NEAR(s.x[0], 1.0, 1e-12);
  EXPECT_NEAR(s.y[0], 1.0, 1e-12);
  const auto p = make_rls_problem(scalar_instance());
  EXPECT_LE(full_grad_norm(p.grad(s)), 1e-12);
}

TEST(Rls, IdentityLambdaTwoSaddleIsY0) {
  RlsInstance inst;
  inst.A = Matrix::Identity(3, 3);
  inst.y0 = vec({0.5, -2.0, 7.0});
  inst.M = Matrix::Identity(3, 3);
  inst.lambda = 2.0;
  const Point s = rls_saddle_point(inst);
  EXPECT_LE((s.x - inst.y0).norm(), 1e-12);
  EXPECT_LE((s.y - inst.y0).norm(), 1e-12);
  EXPECT_LE(full_grad_norm(make_rls_problem(inst).grad(s)), 1e-12);
}

TEST(Rls, GradientMatchesFiniteDifferences) {
  const auto p = make_rls_problem(random_instance(5, 5, 2.0, 5));
  for (const auto& q : sample_box(5, 5, Box{-2, 2}, 20, 6)) {
    const Gradient g = p.grad(q);
    const Gradient fd = finite_diff_gradient(p, q, 1e-5);
    const double scale = std::max(1.0, full_grad_norm(g));
    EXPECT_LE((g.gx - fd.gx).norm() / scale, 1e-6);
    EXPECT_LE((g.gy - fd.gy).norm() / scale, 1e-6);
  }
}

TEST(Rls, SaddleStationaryForVariousShapes) {
  for (auto [m, n] : {std::pair{3, 5}, std::pair{5, 3}, std::pair{4, 4}}) {
    const auto inst = random_instance(m, n, 2.5, 100 + m * 10 + n);
    const auto p = make_rls_problem(inst);
    ASSERT_TRUE(p.saddle);
    EXPECT_LE(full_grad_norm(p.grad(*p.saddle)), 1e-8);
  }
}

TEST(Rls, LocalSaddleInequality) {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const auto p = make_rls_problem(random_instance(4, 3, 2.0, seed));
    const Point& s = *p.saddle;
    const double fs = p.value(s);
    Rng r(seed);
    for (int k = 0; k < 100; ++k) {
      Vector dx(3), dy(4);
      for (Eigen::Index i = 0; i < 3; ++i) dx[i] = r.normal();
      for (Eigen::Index i = 0; i < 4; ++i) dy[i] = r.normal();
      const double tol = 1e-9 * std::max(1.0, std::abs(fs));
      EXPECT_LE(p.value(Point(s.x, s.y + dy)), fs + tol);
      EXPECT_GE(p.value(Point(s.x + dx, s.y)), fs - tol);
    }
  }
}

TEST(Rls, InnerOraclesAreStationary) {
  // rank-deficient A and singular M exercise the least-norm paths
  auto inst = random_instance(4, 3, 3.0, 31);
  inst.A.col(2) = inst.A.col(0) + inst.A.col(1);
  Rng r(33);
  Matrix B(4, 2);
  for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = r.normal();
  inst.M = B * B.transpose();
  const auto p = make_rls_problem(inst);
  for (const auto& q : sample_box(3, 4, Box{-3, 3}, 50, 32)) {
    const Vector xb = p.inner_min_x(q.y);
    EXPECT_LE(p.grad(Point(xb, q.y)).gx.norm(), 1e-8 * (1 + q.y.norm()));
    const Vector yb = p.inner_max_y(q.x);
    EXPECT_LE(p.grad(Point(q.x, yb)).gy.norm(), 1e-8 * (1 + q.x.norm()));
  }
}

TEST(Rls, ValidationErrors) {
  auto inst = scalar_instance();
  inst.lambda = 1.0;
  try {
    make_rls_problem(inst);
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& e) {
    EXPECT_STREQ(e.what(), "two-sided PL requires lambda > 1");
  }
  inst = scalar_instance();
  inst.y0 = vec({1.0, 2.0});
  EXPECT_THROW(make_rls_problem(inst), DimensionError);
  inst = random_instance(2, 2, 2.0, 1);
  inst.M(0, 1) = 0.5;  // not symmetric
  EXPECT_THROW(make_rls_problem(inst), ParameterError);
  inst = random_instance(2, 2, 2.0, 1);
  inst.M(1, 1) = -1.0;  // indefinite
  EXPECT_THROW(make_rls_problem(inst), ParameterError);
}

TEST(Synthetic, ShapesAndZeroNoise) {
  const auto inst = generate_synthetic_rls(6, 6, 0.0, 3.0, 9);
  EXPECT_EQ(inst.A.rows(), 6);
  EXPECT_EQ(inst.A.cols(), 6);
  ASSERT_TRUE(inst.x_true);
  EXPECT_EQ((inst.A * *inst.x_true - inst.y0).norm(), 0.0);
  EXPECT_TRUE(inst.M.isIdentity(0.0));
  const auto wide = generate_synthetic_rls(50, 25, 0.1, 3.0, 7);
  EXPECT_EQ(wide.A.rows(), 25);
  EXPECT_EQ(wide.A.cols(), 50);
  EXPECT_EQ(wide.y0.size(), 25);
}

TEST(Synthetic, Deterministic) {
  const auto a = generate_synthetic_rls(7, 4, 0.1, 3.0, 1234);
  const auto b = generate_synthetic_rls(7, 4, 0.1, 3.0, 1234);
  const auto c = generate_synthetic_rls(7, 4, 0.1, 3.0, 1235);
  EXPECT_TRUE(a.A == b.A);
  EXPECT_TRUE(a.y0 == b.y0);
  EXPECT_FALSE(a.A == c.A);
}

TEST(Synthetic, NoiseHasRequestedSpread) {
  const auto inst = generate_synthetic_rls(3, 4000, 0.1, 3.0, 77);
  const Vector eps = inst.y0 - inst.A * *inst.x_true;
  const double var = eps.squaredNorm() / static_cast<double>(eps.size());
  EXPECT_NEAR(var, 0.01, 0.001);
}

TEST(Synthetic, ArgumentChecks) {
  EXPECT_THROW(generate_synthetic_rls(0, 3, 0.1, 3.0, 1), ParameterError);
  EXPECT_THROW(generate_synthetic_rls(3, 3, -0.1, 3.0, 1), ParameterError);
}

TEST(Conditioned, SingularValuesAreImposed) {
  const Vector sv = vec({3.0, 2.6});
  const auto inst = generate_conditioned_rls(2, 3, sv, 8.0, 0.3, 5);
  Eigen::JacobiSVD<Matrix> svd(inst.A);
  EXPECT_NEAR(svd.singularValues()[0], 3.0, 1e-12);
  EXPECT_NEAR(svd.singularValues()[1], 2.6, 1e-12);
  EXPECT_THROW(generate_conditioned_rls(2, 3, vec({1.0}), 8.0, 0.3, 5), DimensionError);
}

TEST(Fixtures, SmallRlsIsAdmissibleWithMargin) {
  const auto inst = small_rls_instance();
  Eigen::JacobiSVD<Matrix> svd(inst.A);
  const double smax = svd.singularValues()[0];
  const double smin = svd.singularValues()[1];
  // closed forms for M = I: mu1 = 2 smin^2, mu2 = 2 (lambda - 1), c = 2 smax
  const double mu = std::min(2 * smin * smin, 2 * (inst.lambda - 1));
  EXPECT_LT(2 * smax, 0.99 * mu / 2);
}

TEST(Fixtures, QuadraticAndBilinear) {
  const auto q = make_quadratic_fixture();
  EXPECT_EQ(q.value(pt(1, 1)), 0.0);
  EXPECT_EQ(q.grad(pt(1, 1)).gx[0], 2.0);
  EXPECT_EQ(q.grad(pt(1, 1)).gy[0], -2.0);
  const auto b = make_bilinear_fixture();
  EXPECT_EQ(b.value(pt(2, 3)), 6.0);
  EXPECT_FALSE(b.has_inner_oracles());
  EXPECT_THROW(make_fixture("nope"), ParameterError);
}

// ---------------------------------------------------------------------------
// rank-deficient least squares

TEST(RankDeficientLs, ZeroMatrix) {
  const Vector b = vec({1.0, -2.0});
  const auto g = make_rank_deficient_ls(Matrix::Zero(2, 3), b);
  EXPECT_DOUBLE_EQ(g.optimum, 5.0);
  const Vector x = vec({0.3, 9.0, -1.0});
  EXPECT_DOUBLE_EQ(g.value(x), 5.0);
  EXPECT_EQ(g.grad(x).norm(), 0.0);
}

TEST(RankDeficientLs, RankOneExample) {
  Matrix A(2, 2);
  A << 1, 0, 0, 0;
  const auto g = make_rank_deficient_ls(A, vec({1.0, 1.0}));
  EXPECT_NEAR(g.optimum, 1.0, 1e-14);
  for (double t : {-3.0, 0.0, 0.5, 10.0}) EXPECT_NEAR(g.value(vec({1.0, t})), 1.0, 1e-14);
}

TEST(RankDeficientLs, PlModulusFromSvd) {
  Rng r(8);
  Matrix U(5, 2), V(4, 2);
  for (Eigen::Index i = 0; i < U.size(); ++i) U.data()[i] = r.normal();
  for (Eigen::Index i = 0; i < V.size(); ++i) V.data()[i] = r.normal();
  const Matrix A = U * V.transpose();
  Vector b(5);
  for (Eigen::Index i = 0; i < 5; ++i) b[i] = r.normal();
  const auto g = make_rank_deficient_ls(A, b);
  Eigen::JacobiSVD<Matrix> svd(A);
  const double s_plus = svd.singularValues()[1];  // rank 2
  const double mu = 2 * s_plus * s_plus;
  for (int k = 0; k < 1000; ++k) {
    Vector x(4);
    for (Eigen::Index i = 0; i < 4; ++i) x[i] = r.uniform(-5, 5);
    const double gap = g.value(x) - g.optimum;
    EXPECT_GE(0.5 * g.grad(x).squaredNorm(), mu * gap - 1e-9 * (1 + gap));
  }
}

TEST(RankDeficientLs, DimensionMismatch) {
  EXPECT_THROW(make_rank_deficient_ls(Matrix::Zero(2, 3), vec({1.0})), DimensionError);
}
