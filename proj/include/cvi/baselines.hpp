#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cvi/core.hpp"
#include "cvi/linops.hpp"

namespace cvi {

// ---------------------------------------------------------------------------
// Exact Euclidean projections

/// Projection onto {x ≥ 0, Σx = total} by sort and threshold.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_simplex(
    const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar total = 1) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vv = v;
  const Index n = vv.size();
  std::vector<Scalar> u(vv.data(), vv.data() + n);
  std::sort(u.begin(), u.end(), std::greater<Scalar>());
  Scalar cumsum = 0;
  Scalar tau = 0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const Scalar candidate = (cumsum - total) / Scalar(j + 1);
    if (u[j] - candidate > 0) tau = candidate;
  }
  return (vv.array() - tau).cwiseMax(Scalar(0)).matrix();
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_orthant(
    const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseMax(typename Derived::Scalar(0));
}

template <typename Derived, typename DL, typename DU>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_box(
    const Eigen::MatrixBase<Derived>& v, const Eigen::MatrixBase<DL>& lower,
    const Eigen::MatrixBase<DU>& upper) {
  return v.cwiseMax(lower).cwiseMin(upper);
}

template <typename Derived, typename DC>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_ball(
    const Eigen::MatrixBase<Derived>& v, const Eigen::MatrixBase<DC>& center,
    typename Derived::Scalar radius) {
  const auto w = (v - center).eval();
  const auto norm = w.norm();
  if (norm <= radius) return v;
  return center + (radius / norm) * w;
}

// ---------------------------------------------------------------------------
// Projection oracles

struct ProjectionOracle {
  enum class Kind {
    Identity,
    ExactOrthant,
    ExactBox,
    ExactBall,
    ExactSimplex,
    ExactShiftedSimplex,
    GreedyLinear,
    Composite,
  };

  Kind kind = Kind::Identity;
  Vector lower, upper;
  Vector center;
  double radius = 0.0;
  std::vector<Index> blocks;
  /// Rows of A x ≤ b for the greedy kinds.
  Matrix A;
  Vector b;
  double eps = 1e-8;
  /// Overrides the default iteration cap of the greedy loop.
  std::optional<long> max_iters;
  /// Equality part of the composite kind.
  std::optional<EqualityProjector<double>> equalities;

  static ProjectionOracle identity();
  static ProjectionOracle orthant();
  static ProjectionOracle box(Vector lower, Vector upper);
  static ProjectionOracle ball(Vector center, double radius);
  static ProjectionOracle simplex(std::vector<Index> blocks);
  static ProjectionOracle shifted_simplex(std::vector<Index> blocks);
  static ProjectionOracle greedy_linear(Matrix A, Vector b, double eps = 1e-8);
  /// Exact projection onto C x = d, then greedy steps kept inside it.
  static ProjectionOracle composite(const Matrix& C, const Vector& d, Matrix A, Vector b,
                                    double eps = 1e-8);

  /// Oracle matching the structure of a constraint set.
  /// Throws Error(InvalidArgument) for nonlinear sets without a closed form.
  static ProjectionOracle for_constraints(const ConstraintSpec& cs, double eps = 1e-8);

  bool is_exact() const { return kind != Kind::GreedyLinear && kind != Kind::Composite; }
};

/**
 * Applies the oracle. Greedy kinds repeatedly move onto the most violated
 * halfspace (largest (aᵀθ − b)/‖a‖) until every normalized violation is below
 * eps. Throws Error(NonTerminating) past the cap 10·m·⌈ln(v₀/eps)⌉.
 */
Vector project(const ProjectionOracle& oracle, const Vector& v);

/// Largest normalized violation max_j (a_jᵀx − b_j)/‖a_j‖, or 0 when all hold.
double max_normalized_violation(const Matrix& A, const Vector& b, const Vector& x);

// ---------------------------------------------------------------------------
// Projected first-order methods

/// Π(x − γF(x))
Vector gda_step(const VectorField& F, const ProjectionOracle& oracle, double gamma, const Vector& x);

/// Π(x − γF(Π(x − γF(x))))
Vector eg_step(const VectorField& F, const ProjectionOracle& oracle, double gamma, const Vector& x);

struct OgdaState {
  Vector x;
  /// F(x_{n−1})
  Vector F_prev;
};

/// Bootstrap state whose first step coincides with a GDA step.
OgdaState ogda_init(const VectorField& F, const Vector& x0);

/// Π(x_n − 2γF(x_n) + γF(x_{n−1}))
OgdaState ogda_step(const VectorField& F, const ProjectionOracle& oracle, double gamma,
                    const OgdaState& state);

enum class BaseMethod { Gda, Eg, Ogda };

struct BaselineMethod {
  BaseMethod base = BaseMethod::Gda;
  double gamma = 0.1;
  /// Lookahead period; 0 disables lookahead.
  int la_k = 0;
  double la_alpha = 0.5;

  std::string name() const;
  /// gda, eg, ogda or la<k>-<base>.
  static BaselineMethod parse(const std::string& name);
};

/**
 * Runs a projected baseline for `iterations` base steps from `x0` (default:
 * the problem's interior point). With lookahead, records are only taken at
 * the synchronization points; `iter` counts base steps.
 */
SolverTrace run_baseline(const ProblemInstance& problem, const BaselineMethod& method,
                         long iterations, const RunLimits& limits = {},
                         std::optional<Vector> x0 = std::nullopt,
                         std::optional<ProjectionOracle> oracle = std::nullopt);

// ---------------------------------------------------------------------------
// Frank-Wolfe

struct FwOptions {
  enum class StepRule { OpenLoop, GapAdaptive };
  StepRule rule = StepRule::OpenLoop;
  long max_iters = 1000;
  double eps = 1e-6;
  /// Constants of the gap-adaptive rule γ = min(1, ν/(2C)·g_t).
  double C = 1.0;
  double nu = 1.0;
};

/**
 * Frank-Wolfe for VIs over a compact set with an LMO. Each record carries the
 * FW gap ⟨z − s, F(z)⟩ under the `gap` metric; the run stops once it is ≤ eps.
 * Throws Error(MissingLMO).
 */
SolverTrace fw_run(const ProblemInstance& problem, const FwOptions& options,
                   const RunLimits& limits = {}, std::optional<Vector> z0 = std::nullopt);

}  // namespace cvi
