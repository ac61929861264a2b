#include <gtest/gtest.h>

#include <cmath>

#include "cvi/acvi.hpp"
#include "cvi/linops.hpp"
#include "cvi/problems.hpp"
#include "testing.hpp"

using namespace cvi;
using cvi::testing::Gen;

namespace {

double inf_norm(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(EqualityProjector, TwoVariableHyperplane) {
  const Matrix C{{1.0, 1.0}};
  const Vector d{{1.0}};
  const auto proj = build_equality_projector(C, d);
  const Matrix expected{{0.5, -0.5}, {-0.5, 0.5}};
  EXPECT_LT(inf_norm(proj.P_c() - expected), 1e-15);
  EXPECT_LT(inf_norm(proj.d_c() - Vector{{0.5, 0.5}}), 1e-15);
  EXPECT_LT(inf_norm(affine_project(proj, Vector::Zero(2)) - Vector{{0.5, 0.5}}), 1e-15);
  EXPECT_LT(inf_norm(affine_project(proj, Vector{{1.0, 0.0}}) - Vector{{1.0, 0.0}}), 1e-15);
}

TEST(EqualityProjector, SimplexAffineHull) {
  const int n = 7;
  const auto proj = build_equality_projector(Matrix::Ones(1, n), Vector::Ones(1));
  const Matrix expected = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
  EXPECT_LT(inf_norm(proj.P_c() - expected), 1e-14);
  EXPECT_LT(inf_norm(proj.d_c() - Vector::Constant(n, 1.0 / n)), 1e-15);
}

TEST(EqualityProjector, NoEqualities) {
  const auto proj = build_equality_projector(Matrix(0, 4), Vector(0));
  EXPECT_FALSE(proj.has_equalities());
  EXPECT_EQ(proj.P_c(), Matrix::Identity(4, 4));
  EXPECT_EQ(proj.d_c(), Vector::Zero(4));
  const Vector v{{1.0, -2.0, 3.0, 0.5}};
  EXPECT_EQ(affine_project(proj, v), v);
}

TEST(EqualityProjector, RankDeficientThrows) {
  Matrix C(2, 3);
  C << 1, 2, 3, 2, 4, 6;
  try {
    build_equality_projector(C, Vector::Zero(2));
    FAIL() << "expected RankDeficient";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
  EXPECT_THROW(build_equality_projector(Matrix::Ones(3, 2), Vector::Zero(3)), Error);
}

TEST(EqualityProjector, RandomFullRankInvariants) {
  Gen gen(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen.integer(1, 200);
    const int p = gen.integer(0, std::min(20, n));
    const Matrix C = gen.matrix(p, n);
    const Vector d = gen.vector(p);
    const auto proj = build_equality_projector(C, d);
    const Matrix P = proj.P_c();
    EXPECT_LT(inf_norm(P - P.transpose()), 1e-12);
    EXPECT_LT(inf_norm(P * P - P), 1e-10);
    if (p > 0) {
      EXPECT_LT(inf_norm(C * P), 1e-10);
      EXPECT_LT(inf_norm(C * proj.d_c() - d), 1e-10);
    }
    const Vector v = gen.vector(n, 3.0);
    const Vector r = affine_project(proj, v);
    if (p > 0) EXPECT_LT(inf_norm(C * r - d), 1e-10);
    EXPECT_LT(inf_norm(affine_project(proj, r) - r), 1e-12);
    // v − r is orthogonal to the null space of C: it lies in the row space.
    if (p > 0) EXPECT_LT(inf_norm(P * (v - r)), 1e-9);
  }
}

TEST(EqualityProjector, ImplicitPathMatchesDense) {
  Gen gen(5);
  const Matrix C = gen.matrix(6, 40);
  const Vector d = gen.vector(6);
  const auto dense = build_equality_projector(C, d, true);
  const auto implicit = build_equality_projector(C, d, false);
  EXPECT_TRUE(dense.is_dense());
  EXPECT_FALSE(implicit.is_dense());
  const Vector v = gen.vector(40);
  EXPECT_LT(inf_norm(dense.apply(v) - implicit.apply(v)), 1e-12);
  EXPECT_LT(inf_norm(affine_project(dense, v) - affine_project(implicit, v)), 1e-12);
  EXPECT_LT(inf_norm(dense.P_c() - implicit.P_c()), 1e-12);
}

TEST(EqualityProjector, FloatScalar) {
  const auto proj = build_equality_projector<float>(Matrix::Ones(1, 4), Vector::Ones(1));
  const Eigen::VectorXf r = affine_project(proj, Eigen::VectorXf::Zero(4));
  EXPECT_NEAR(r.sum(), 1.0f, 1e-6f);
}

TEST(DampedNewton, LinearResidualOneStep) {
  const Vector c{{3.0, -1.0, 2.0}};
  const auto res = damped_newton_root([&](const Vector& x) -> Vector { return x - c; },
                                      [](const Vector& x) -> Matrix {
                                        return Matrix::Identity(x.size(), x.size());
                                      },
                                      Vector::Zero(3));
  EXPECT_EQ(res.iterations, 1);
  EXPECT_LT(inf_norm(res.x - c), 1e-15);
}

TEST(DampedNewton, CubeRoot) {
  NewtonOptions opt;
  opt.tol = 1e-12;
  const auto res = damped_newton_root(
      [](const Vector& x) -> Vector { return Vector::Constant(1, x[0] * x[0] * x[0] - 8.0); },
      [](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, 3.0 * x[0] * x[0]); },
      Vector::Constant(1, 3.0), opt);
  EXPECT_NEAR(res.x[0], 2.0, 1e-13);
  EXPECT_LE(res.residual_inf, 1e-12);
}

TEST(DampedNewton, GuardIsCheckedBeforeResidual) {
  // From x0 = 40 the full Newton step on log(x) − log(5) lands at x < 0.
  int bad_evaluations = 0;
  const auto residual = [&](const Vector& x) -> Vector {
    if (!(x[0] > 0.0)) ++bad_evaluations;
    return Vector::Constant(1, std::log(x[0]) - std::log(5.0));
  };
  const auto jacobian = [](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, 1.0 / x[0]); };
  const auto guard = [](const Vector& x) { return x[0] > 0.0; };
  const auto res = damped_newton_root(residual, jacobian, Vector::Constant(1, 40.0), {}, guard);
  EXPECT_EQ(bad_evaluations, 0);
  EXPECT_NEAR(res.x[0], 5.0, 1e-9);
}

TEST(DampedNewton, InfeasibleWarmStartThrows) {
  try {
    damped_newton_root([](const Vector& x) -> Vector { return x; },
                       [](const Vector& x) -> Matrix { return Matrix::Identity(x.size(), x.size()); },
                       Vector::Constant(1, -1.0), {}, [](const Vector& x) { return x[0] > 0.0; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleWarmStart);
  }
}

TEST(DampedNewton, SingularJacobianThrows) {
  try {
    damped_newton_root([](const Vector& x) -> Vector { return x + Vector::Ones(2); },
                       [](const Vector&) -> Matrix { return Matrix::Zero(2, 2); }, Vector::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularJacobian);
  }
}

TEST(DampedNewton, BudgetExhaustionThrows) {
  NewtonOptions opt;
  opt.max_iters = 2;
  opt.tol = 1e-14;
  try {
    damped_newton_root([](const Vector& x) -> Vector { return Vector::Constant(1, std::atan(x[0])); },
                       [](const Vector& x) -> Matrix {
                         return Matrix::Constant(1, 1, 1.0 / (1.0 + x[0] * x[0]));
                       },
                       Vector::Constant(1, 10.0), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MaxIterationsExceeded);
  }
}

TEST(DampedNewton, CbgSubproblemMatchesGridOracle) {
  const auto p = make_cbg();
  const auto proj = build_equality_projector(p.constraints.C, p.constraints.d);
  const Vector y{{1.0, 1.0}};
  const Vector lambda = Vector::Zero(2);
  const double beta = 0.08;
  const auto G = [&](const Vector& x) -> Vector {
    // G written out by hand: no equalities, so P_c = I and d_c = 0.
    return x + p.field(x) / beta - y + lambda / beta;
  };
  const auto res = damped_newton_root(G,
                                      [&](const Vector& x) -> Matrix {
                                        return Matrix::Identity(2, 2) + p.field.jacobian(x) / beta;
                                      },
                                      y);
  const Vector oracle = cvi::testing::grid_root_2d(G, Vector::Zero(2), 4.0);
  EXPECT_LT(inf_norm(res.x - oracle), 1e-8);
  EXPECT_LT(inf_norm(x_subproblem_residual(p.field, proj, res.x, y, lambda, beta)), 1e-10);
}
