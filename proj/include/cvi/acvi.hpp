#pragma once

#include <optional>
#include <string>

#include "cvi/core.hpp"
#include "cvi/linops.hpp"

namespace cvi {

struct AcviState {
  Vector x;
  Vector y;
  Vector lambda;
  double mu = 0.0;
  int t = 0;
  int k = 0;
};

/// Lower clamp for μ_t.
inline constexpr double kMuFloor = 1e-300;

/// G(x) = x + (1/β)P_c F(x) − P_c y_k + (1/β)P_c λ_k − d_c.
Vector x_subproblem_residual(const VectorField& F, const EqualityProjector<double>& proj,
                             const Vector& x, const Vector& y_k, const Vector& lambda_k,
                             double beta);

/// Gradient of −μ Σ log(−φᵢ(y)) + (β/2)‖y − x_next − λ_k/β‖².
Vector y_objective_gradient(const ConstraintSpec& cs, const Vector& y, const Vector& x_next,
                            const Vector& lambda_k, double beta, double mu);

/**
 * Closed-form x-update for affine F(x) = A x + b. The matrix
 * I + (1/β)P_c A depends only on β, so it is factorized once per run.
 */
class AffineXSolver {
 public:
  AffineXSolver(const AffineForm& F, const EqualityProjector<double>& proj, double beta);

  Vector solve(const Vector& y_k, const Vector& lambda_k) const;

 private:
  const EqualityProjector<double>* proj_;
  double beta_;
  Matrix M_;
  Vector Pb_;
  Eigen::PartialPivLU<Matrix> lu_;
};

struct XSolveOptions {
  XSolver mode = XSolver::Auto;
  double tol = 1e-10;
  int max_iters = 100;
  InnerFirstOrderOptions inner;
  /// Previous x; required for the inner first-order mode, used by Newton.
  std::optional<Vector> warm;
};

/**
 * Solves G(x) = 0. The inner first-order mode runs `inner.steps` steps of
 * GDA or EG on G from the warm start and makes no accuracy promise.
 *
 * Throws Error(SingularSystem) when the affine system is singular and
 * propagates Newton failures.
 */
Vector solve_x_subproblem(const VectorField& F, const EqualityProjector<double>& proj,
                          const Vector& y_k, const Vector& lambda_k, double beta,
                          const XSolveOptions& options = {});

struct YSolveOptions {
  YSolver mode = YSolver::StructuralClosedForm;
  double tol = 1e-10;
  int max_iters = 100;
  /// Previous y; must be strictly feasible for the Newton path.
  std::optional<Vector> warm;
};

/**
 * argmin_y −μ Σ log(−φᵢ(y)) + (β/2)‖y − x_next − λ_k/β‖².
 *
 * The closed-form mode handles the orthant, simplex kinds (their inequalities
 * are bounds), boxes and balls; general sets fall back to damped Newton.
 */
Vector solve_y_subproblem(const ConstraintSpec& cs, const Vector& x_next, const Vector& lambda_k,
                          double beta, double mu, const YSolveOptions& options = {});

/// λ_k + β(x − y)
Vector update_lambda(const Vector& lambda_k, const Vector& x_next, const Vector& y_next,
                     double beta);

/// Scalar root of a strictly increasing f on (lo, hi), safeguarded Newton.
double increasing_root(const std::function<double(double)>& f,
                       const std::function<double(double)>& df, double lo, double hi,
                       double guess);

/**
 * ACVI. Each inner iteration solves the x-subproblem, the y-subproblem and
 * updates λ; (y, λ) carry over to the next outer iteration with μ_t = δμ_{t−1}.
 *
 * With x_solver = InnerFirstOrder the subproblems are only approximated
 * (l steps each, x never reinitialized).
 */
SolverTrace acvi_run(const ProblemInstance& problem, const AcviConfig& config,
                     const RunLimits& limits = {});

/// acvi_run with the x- and y-updates replaced by l inner optimizer steps.
SolverTrace acvi_inexact_run(const ProblemInstance& problem, AcviConfig config,
                             const RunLimits& limits = {});

std::string describe(const AcviConfig& config);

}  // namespace cvi
