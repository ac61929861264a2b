#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cvi/error.hpp"

namespace cvi {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// F(x) = A x + b. Enables the closed-form x-update in ACVI.
struct AffineForm {
  Matrix A;
  Vector b;
};

/**
 * The operator F of a variational inequality. `eval` must be re-entrant; all
 * benchmark fields capture immutable data only.
 */
struct VectorField {
  Index dim = 0;
  std::function<Vector(const Vector&)> eval;
  /// Empty when no analytic Jacobian is available.
  std::function<Matrix(const Vector&)> jacobian;
  std::optional<double> lipschitz_hint;
  std::optional<AffineForm> affine;

  Vector operator()(const Vector& x) const { return eval(x); }
  bool has_jacobian() const { return static_cast<bool>(jacobian); }

  static VectorField from_affine(Matrix A, Vector b);
};

/// A smooth convex scalar constraint φ(x) ≤ 0.
struct Inequality {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  /// Optional; required only by the full-space Newton y-solver.
  std::function<Matrix(const Vector&)> hessian;

  static Inequality lower_bound(Index n, Index j, double bound);
  static Inequality upper_bound(Index n, Index j, double bound);
  static Inequality halfspace(Vector a, double b);
  /// ‖x − center‖² − radius² ≤ 0
  static Inequality ball(Vector center, double radius);
};

/// Rows of A x ≤ b, present whenever every inequality is affine.
struct LinearInequalities {
  Matrix A;
  Vector b;
};

namespace tags {
struct Orthant {};
/// Per-coordinate bounds; ±infinity marks an absent side.
struct Box {
  Vector lower;
  Vector upper;
};
struct EuclideanBall {
  Vector center;
  double radius = 0.0;
};
/// Product of probability simplices, one per block.
struct Simplex {
  std::vector<Index> blocks;
};
/// Product of {x ≥ −e, eᵀx = 0}, one per block.
struct ShiftedSimplex {
  std::vector<Index> blocks;
};
struct General {};
}  // namespace tags

using StructureTag = std::variant<tags::Orthant, tags::Box, tags::EuclideanBall,
                                  tags::Simplex, tags::ShiftedSimplex, tags::General>;

std::string tag_name(const StructureTag& tag);

/**
 * Feasible set {x : φᵢ(x) ≤ 0, C x = d}. The structure tag abbreviates the
 * inequalities (and for the simplex kinds, the block equalities) so solvers
 * can use closed forms; it must agree with the explicit description.
 */
struct ConstraintSpec {
  Matrix C;
  Vector d;
  std::vector<Inequality> inequalities;
  StructureTag tag = tags::General{};
  std::optional<LinearInequalities> linear;

  Index dim() const { return C.cols(); }
  Index num_equalities() const { return C.rows(); }
  Index num_inequalities() const { return static_cast<Index>(inequalities.size()); }

  /// φ(x) stacked.
  Vector values(const Vector& x) const;
  bool strictly_feasible(const Vector& x) const;
  double equality_residual(const Vector& x) const;

  static ConstraintSpec unconstrained(Index n);
  static ConstraintSpec orthant(Index n);
  static ConstraintSpec box(Vector lower, Vector upper);
  static ConstraintSpec ball(Vector center, double radius);
  static ConstraintSpec simplex(std::vector<Index> blocks);
  static ConstraintSpec shifted_simplex(std::vector<Index> blocks);
};

/// Block-diagonal matrix with one row of ones per block.
Matrix block_sum_matrix(const std::vector<Index>& blocks);

struct ProblemInstance {
  std::string name;
  VectorField field;
  ConstraintSpec constraints;
  Vector interior_point;
  /// Metadata for metrics only; solvers never read it.
  std::optional<Vector> known_solution;
  /// argmin over the feasible set of ⟨r, x⟩; empty when the set is unbounded
  /// or no cheap oracle exists.
  std::function<Vector(const Vector&)> lmo;
  /// Name of the metric that is meaningful for this problem.
  std::string default_metric = "dist_to_solution";

  Index dim() const { return field.dim; }
  bool has_lmo() const { return static_cast<bool>(lmo); }
};

enum class XSolver { Auto, AffineClosedForm, Newton, InnerFirstOrder };
enum class YSolver { StructuralClosedForm, DampedNewton };
enum class InnerOptimizer { Gda, Eg };

struct InnerFirstOrderOptions {
  InnerOptimizer optimizer = InnerOptimizer::Eg;
  int steps = 1;
  double eta_x = 1e-3;
  double eta_y = 0.2;
};

struct AcviConfig {
  double beta = 0.5;
  /// μ₋₁; the first outer iteration uses δ·μ₋₁.
  double mu_init = 1e-6;
  double delta = 0.5;
  /// Number of inner iterations for each outer iteration.
  std::vector<int> inner_schedule{50};
  XSolver x_solver = XSolver::Auto;
  YSolver y_solver = YSolver::StructuralClosedForm;
  InnerFirstOrderOptions inner;
  double tol_subproblem = 1e-10;
  int newton_max_iters = 100;
  /// Overrides the μ schedule with a constant (inexact runs use this).
  std::optional<double> mu_fixed;
  std::optional<Vector> lambda_init;
  /// Defaults to the problem's interior point.
  std::optional<Vector> y_init;
  std::optional<Vector> x_init;

  static AcviConfig constant_schedule(int outer, int inner);
  int total_updates() const;
  /// Violated invariants; empty when valid.
  std::vector<std::string> validate() const;
};

struct TraceRecord {
  int t = 0;
  int k = 0;
  long iter = 0;
  Vector x;
  std::optional<Vector> y;
  std::optional<Vector> lambda;
  double wall_time_s = 0.0;
  std::map<std::string, double> metrics;
};

struct SolverTrace {
  std::string method;
  std::vector<TraceRecord> records;
  std::string config_echo;

  const TraceRecord& last() const { return records.back(); }
};

/// Early-termination controls shared by every run loop.
struct RunLimits {
  std::optional<long> max_updates;
  std::optional<double> max_wall_time_s;
  /// Returns true when the run should stop after this record.
  std::function<bool(const TraceRecord&)> stop;
};

/**
 * Appends records with monotone wall time and reports whether the run may
 * continue under the given limits.
 */
class TraceRecorder {
 public:
  TraceRecorder(SolverTrace& trace, const RunLimits& limits);

  double elapsed() const;
  /// Stores the record; false when a limit or the stop predicate fired.
  bool push(TraceRecord record);
  bool update_budget_left(long updates_done) const;

 private:
  SolverTrace& trace_;
  const RunLimits& limits_;
  std::chrono::steady_clock::time_point start_;
};

struct ValidationOptions {
  bool check_derivatives = false;
  int samples = 20;
  unsigned long seed = 0;
};

/**
 * Lists violated ProblemInstance invariants. Never throws and never mutates
 * the problem. Derivative checks need a feasible-point sampler and are opt-in.
 */
std::vector<std::string> validate_problem(const ProblemInstance& problem,
                                          const ValidationOptions& options = {});

/// max relative deviation between J(x) and central differences of F.
double jacobian_fd_error(const VectorField& field, const Vector& x, double h = 1e-6);
/// max relative deviation between ∇φ(x) and central differences of φ.
double gradient_fd_error(const Inequality& phi, const Vector& x, double h = 1e-6);

}  // namespace cvi
