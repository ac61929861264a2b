#include "cvi/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cvi/linops.hpp"
#include "cvi/random.hpp"

namespace cvi {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::InfeasibleWarmStart: return "InfeasibleWarmStart";
    case ErrorKind::NonTerminating: return "NonTerminating";
    case ErrorKind::MissingLMO: return "MissingLMO";
    case ErrorKind::ZeroReference: return "ZeroReference";
  }
  return "Unknown";
}

Error Error::with_context(int outer, int inner) const {
  std::ostringstream msg;
  msg << what() << " (at t=" << outer << ", k=" << inner << ")";
  Error annotated(kind_, msg.str());
  annotated.context_ = std::make_pair(outer, inner);
  return annotated;
}

VectorField VectorField::from_affine(Matrix A, Vector b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw Error(ErrorKind::InvalidArgument, "affine field needs square A and matching b");
  VectorField field;
  field.dim = A.rows();
  field.eval = [A, b](const Vector& x) -> Vector { return A * x + b; };
  field.jacobian = [A](const Vector&) -> Matrix { return A; };
  field.affine = AffineForm{std::move(A), std::move(b)};
  return field;
}

// ---------------------------------------------------------------------------
// Inequalities

Inequality Inequality::lower_bound(Index n, Index j, double bound) {
  Inequality phi;
  phi.value = [j, bound](const Vector& x) { return bound - x[j]; };
  phi.gradient = [n, j](const Vector&) -> Vector {
    Vector g = Vector::Zero(n);
    g[j] = -1.0;
    return g;
  };
  phi.hessian = [n](const Vector&) -> Matrix { return Matrix::Zero(n, n); };
  return phi;
}

Inequality Inequality::upper_bound(Index n, Index j, double bound) {
  Inequality phi;
  phi.value = [j, bound](const Vector& x) { return x[j] - bound; };
  phi.gradient = [n, j](const Vector&) -> Vector {
    Vector g = Vector::Zero(n);
    g[j] = 1.0;
    return g;
  };
  phi.hessian = [n](const Vector&) -> Matrix { return Matrix::Zero(n, n); };
  return phi;
}

Inequality Inequality::halfspace(Vector a, double b) {
  Inequality phi;
  const Index n = a.size();
  phi.value = [a, b](const Vector& x) { return a.dot(x) - b; };
  phi.gradient = [a](const Vector&) -> Vector { return a; };
  phi.hessian = [n](const Vector&) -> Matrix { return Matrix::Zero(n, n); };
  return phi;
}

Inequality Inequality::ball(Vector center, double radius) {
  Inequality phi;
  const Index n = center.size();
  const double r2 = radius * radius;
  phi.value = [center, r2](const Vector& x) { return (x - center).squaredNorm() - r2; };
  phi.gradient = [center](const Vector& x) -> Vector { return 2.0 * (x - center); };
  phi.hessian = [n](const Vector&) -> Matrix { return 2.0 * Matrix::Identity(n, n); };
  return phi;
}

// ---------------------------------------------------------------------------
// Constraint sets

std::string tag_name(const StructureTag& tag) {
  struct Visitor {
    std::string operator()(const tags::Orthant&) const { return "orthant"; }
    std::string operator()(const tags::Box&) const { return "box"; }
    std::string operator()(const tags::EuclideanBall&) const { return "euclidean_ball"; }
    std::string operator()(const tags::Simplex&) const { return "simplex"; }
    std::string operator()(const tags::ShiftedSimplex&) const { return "shifted_simplex"; }
    std::string operator()(const tags::General&) const { return "general"; }
  };
  return std::visit(Visitor{}, tag);
}

Vector ConstraintSpec::values(const Vector& x) const {
  Vector v(num_inequalities());
  for (Index i = 0; i < num_inequalities(); ++i) v[i] = inequalities[i].value(x);
  return v;
}

bool ConstraintSpec::strictly_feasible(const Vector& x) const {
  return std::all_of(inequalities.begin(), inequalities.end(),
                     [&](const Inequality& phi) { return phi.value(x) < 0.0; });
}

double ConstraintSpec::equality_residual(const Vector& x) const {
  if (num_equalities() == 0) return 0.0;
  return (C * x - d).lpNorm<Eigen::Infinity>();
}

Matrix block_sum_matrix(const std::vector<Index>& blocks) {
  Index n = 0;
  for (Index b : blocks) n += b;
  Matrix C = Matrix::Zero(static_cast<Index>(blocks.size()), n);
  Index offset = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    C.row(static_cast<Index>(i)).segment(offset, blocks[i]).setOnes();
    offset += blocks[i];
  }
  return C;
}

ConstraintSpec ConstraintSpec::unconstrained(Index n) {
  ConstraintSpec spec;
  spec.C = Matrix::Zero(0, n);
  spec.d = Vector::Zero(0);
  spec.tag = tags::General{};
  spec.linear = LinearInequalities{Matrix::Zero(0, n), Vector::Zero(0)};
  return spec;
}

ConstraintSpec ConstraintSpec::orthant(Index n) {
  ConstraintSpec spec = unconstrained(n);
  for (Index j = 0; j < n; ++j) spec.inequalities.push_back(Inequality::lower_bound(n, j, 0.0));
  spec.tag = tags::Orthant{};
  spec.linear = LinearInequalities{-Matrix::Identity(n, n), Vector::Zero(n)};
  return spec;
}

ConstraintSpec ConstraintSpec::box(Vector lower, Vector upper) {
  const Index n = lower.size();
  if (upper.size() != n) throw Error(ErrorKind::InvalidArgument, "box bounds differ in length");
  ConstraintSpec spec = unconstrained(n);
  std::vector<Vector> rows;
  std::vector<double> rhs;
  for (Index j = 0; j < n; ++j) {
    if (!(lower[j] < upper[j])) throw Error(ErrorKind::InvalidArgument, "box has empty interior");
    if (std::isfinite(lower[j])) {
      spec.inequalities.push_back(Inequality::lower_bound(n, j, lower[j]));
      rows.push_back(-Vector::Unit(n, j));
      rhs.push_back(-lower[j]);
    }
    if (std::isfinite(upper[j])) {
      spec.inequalities.push_back(Inequality::upper_bound(n, j, upper[j]));
      rows.push_back(Vector::Unit(n, j));
      rhs.push_back(upper[j]);
    }
  }
  LinearInequalities lin{Matrix(static_cast<Index>(rows.size()), n),
                         Vector(static_cast<Index>(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lin.A.row(static_cast<Index>(i)) = rows[i].transpose();
    lin.b[static_cast<Index>(i)] = rhs[i];
  }
  spec.linear = std::move(lin);
  spec.tag = tags::Box{std::move(lower), std::move(upper)};
  return spec;
}

ConstraintSpec ConstraintSpec::ball(Vector center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be positive");
  ConstraintSpec spec = unconstrained(center.size());
  spec.inequalities.push_back(Inequality::ball(center, radius));
  spec.linear.reset();
  spec.tag = tags::EuclideanBall{std::move(center), radius};
  return spec;
}

ConstraintSpec ConstraintSpec::simplex(std::vector<Index> blocks) {
  const Matrix C = block_sum_matrix(blocks);
  ConstraintSpec spec = orthant(C.cols());
  spec.C = C;
  spec.d = Vector::Ones(C.rows());
  spec.tag = tags::Simplex{std::move(blocks)};
  return spec;
}

ConstraintSpec ConstraintSpec::shifted_simplex(std::vector<Index> blocks) {
  const Matrix C = block_sum_matrix(blocks);
  const Index n = C.cols();
  ConstraintSpec spec = unconstrained(n);
  for (Index j = 0; j < n; ++j) spec.inequalities.push_back(Inequality::lower_bound(n, j, -1.0));
  spec.linear = LinearInequalities{-Matrix::Identity(n, n), Vector::Ones(n)};
  spec.C = C;
  spec.d = Vector::Zero(C.rows());
  spec.tag = tags::ShiftedSimplex{std::move(blocks)};
  return spec;
}

// ---------------------------------------------------------------------------
// Configuration and traces

AcviConfig AcviConfig::constant_schedule(int outer, int inner) {
  AcviConfig config;
  config.inner_schedule.assign(static_cast<std::size_t>(std::max(outer, 0)), inner);
  return config;
}

int AcviConfig::total_updates() const {
  int total = 0;
  for (int k : inner_schedule) total += k;
  return total;
}

std::vector<std::string> AcviConfig::validate() const {
  std::vector<std::string> issues;
  if (!(beta > 0.0)) issues.emplace_back("beta must be positive");
  if (!(delta > 0.0 && delta < 1.0)) issues.emplace_back("delta must lie in (0, 1)");
  if (!(mu_init > 0.0)) issues.emplace_back("mu_init must be positive");
  if (!(tol_subproblem > 0.0)) issues.emplace_back("tol_subproblem must be positive");
  if (newton_max_iters <= 0) issues.emplace_back("newton_max_iters must be positive");
  if (mu_fixed && !(*mu_fixed > 0.0)) issues.emplace_back("mu_fixed must be positive");
  if (std::any_of(inner_schedule.begin(), inner_schedule.end(), [](int k) { return k < 0; }))
    issues.emplace_back("inner iteration counts must be non-negative");
  if (x_solver == XSolver::InnerFirstOrder) {
    if (inner.steps <= 0) issues.emplace_back("inner steps must be positive");
    if (!(inner.eta_x > 0.0) || !(inner.eta_y > 0.0))
      issues.emplace_back("inner step sizes must be positive");
  }
  return issues;
}

TraceRecorder::TraceRecorder(SolverTrace& trace, const RunLimits& limits)
    : trace_(trace), limits_(limits), start_(std::chrono::steady_clock::now()) {}

double TraceRecorder::elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool TraceRecorder::push(TraceRecord record) {
  record.wall_time_s = elapsed();
  if (!trace_.records.empty())
    record.wall_time_s = std::max(record.wall_time_s, trace_.records.back().wall_time_s);
  const bool stop = limits_.stop && limits_.stop(record);
  const bool out_of_time = limits_.max_wall_time_s && record.wall_time_s >= *limits_.max_wall_time_s;
  trace_.records.push_back(std::move(record));
  return !stop && !out_of_time;
}

bool TraceRecorder::update_budget_left(long updates_done) const {
  return !limits_.max_updates || updates_done < *limits_.max_updates;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

double relative_deviation(const Matrix& exact, const Matrix& approx) {
  const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
  return (exact - approx).cwiseAbs().maxCoeff() / scale;
}

bool tag_contains(const StructureTag& tag, const Vector& x) {
  struct Visitor {
    const Vector& x;
    bool operator()(const tags::Orthant&) const { return (x.array() >= 0.0).all(); }
    bool operator()(const tags::Box& b) const {
      return (x.array() >= b.lower.array()).all() && (x.array() <= b.upper.array()).all();
    }
    bool operator()(const tags::EuclideanBall& b) const {
      return (x - b.center).norm() <= b.radius;
    }
    bool operator()(const tags::Simplex&) const { return (x.array() >= 0.0).all(); }
    bool operator()(const tags::ShiftedSimplex&) const { return (x.array() >= -1.0).all(); }
    bool operator()(const tags::General&) const { return true; }
  };
  return std::visit(Visitor{x}, tag);
}

std::optional<std::string> tag_equality_mismatch(const ConstraintSpec& cs) {
  const std::vector<Index>* blocks = nullptr;
  double rhs = 0.0;
  if (const auto* s = std::get_if<tags::Simplex>(&cs.tag)) {
    blocks = &s->blocks;
    rhs = 1.0;
  } else if (const auto* s = std::get_if<tags::ShiftedSimplex>(&cs.tag)) {
    blocks = &s->blocks;
  }
  if (!blocks) return std::nullopt;
  const Matrix expected = block_sum_matrix(*blocks);
  if (expected.rows() != cs.C.rows() || expected.cols() != cs.C.cols() || expected != cs.C ||
      (cs.d.array() != rhs).any())
    return "structure tag " + tag_name(cs.tag) + " disagrees with the equality constraints";
  return std::nullopt;
}

}  // namespace

double jacobian_fd_error(const VectorField& field, const Vector& x, double h) {
  const Index n = field.dim;
  Matrix fd(n, n);
  Vector xp = x;
  Vector xm = x;
  for (Index j = 0; j < n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    fd.col(j) = (field.eval(xp) - field.eval(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return relative_deviation(field.jacobian(x), fd);
}

double gradient_fd_error(const Inequality& phi, const Vector& x, double h) {
  const Index n = x.size();
  Vector fd(n);
  Vector xp = x;
  Vector xm = x;
  for (Index j = 0; j < n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    fd[j] = (phi.value(xp) - phi.value(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return relative_deviation(phi.gradient(x), fd);
}

std::vector<std::string> validate_problem(const ProblemInstance& problem,
                                          const ValidationOptions& options) {
  std::vector<std::string> report;
  const Index n = problem.field.dim;
  const ConstraintSpec& cs = problem.constraints;
  if (n <= 0 || !problem.field.eval) {
    report.emplace_back("vector field has no dimension or evaluator");
    return report;
  }
  if (cs.C.cols() != n || cs.d.size() != cs.C.rows()) {
    report.emplace_back("equality constraints have inconsistent dimensions");
    return report;
  }
  if (problem.interior_point.size() != n) {
    report.emplace_back("interior point has wrong length");
    return report;
  }

  std::optional<EqualityProjector<double>> proj;
  try {
    proj = build_equality_projector(cs.C, cs.d);
  } catch (const Error& e) {
    report.emplace_back(std::string("equality matrix is rank deficient: ") + e.what());
  }

  try {
    if (problem.field.eval(problem.interior_point).size() != n)
      report.emplace_back("F(x) has wrong length");
  } catch (const std::exception& e) {
    report.emplace_back(std::string("F failed at the interior point: ") + e.what());
  }

  for (Index i = 0; i < cs.num_inequalities(); ++i) {
    if (!(cs.inequalities[i].value(problem.interior_point) < 0.0))
      report.push_back("inequality " + std::to_string(i + 1) + " not strict");
  }
  if (cs.equality_residual(problem.interior_point) > 1e-10)
    report.emplace_back("interior point violates the equality constraints");

  if (problem.known_solution) {
    const Vector& xs = *problem.known_solution;
    if (xs.size() != n) {
      report.emplace_back("known solution has wrong length");
    } else {
      for (Index i = 0; i < cs.num_inequalities(); ++i)
        if (cs.inequalities[i].value(xs) > 1e-10)
          report.push_back("known solution violates inequality " + std::to_string(i + 1));
      if (cs.equality_residual(xs) > 1e-10)
        report.emplace_back("known solution violates the equality constraints");
    }
  }

  if (auto mismatch = tag_equality_mismatch(cs)) report.push_back(*mismatch);

  // Membership spot-check of the structure tag against the explicit φ.
  if (!std::holds_alternative<tags::General>(cs.tag) && proj) {
    Rng rng(options.seed);
    const double scale = 1.0 + problem.interior_point.lpNorm<Eigen::Infinity>();
    int disagreements = 0;
    for (int s = 0; s < 50; ++s) {
      Vector x = problem.interior_point + scale * rng.gaussian_vector(n);
      x = affine_project(*proj, x);
      const Vector phi = cs.values(x);
      const bool explicit_in = phi.size() == 0 || phi.maxCoeff() <= 0.0;
      if (explicit_in != tag_contains(cs.tag, x)) ++disagreements;
    }
    if (disagreements > 0)
      report.push_back("structure tag " + tag_name(cs.tag) +
                       " disagrees with the inequalities on sampled points");
  }

  if (options.check_derivatives && report.empty()) {
    Rng rng(options.seed + 1);
    for (int s = 0; s < options.samples; ++s) {
      Vector step = rng.gaussian_vector(n);
      if (proj) step = proj->apply(step);
      Vector x = problem.interior_point + step;
      for (int halvings = 0; halvings < 60 && !cs.strictly_feasible(x); ++halvings) {
        step *= 0.5;
        x = problem.interior_point + step;
      }
      if (problem.field.has_jacobian() && jacobian_fd_error(problem.field, x) > 1e-5)
        report.push_back("Jacobian disagrees with finite differences at sample " +
                         std::to_string(s));
      for (Index i = 0; i < cs.num_inequalities(); ++i)
        if (gradient_fd_error(cs.inequalities[i], x) > 1e-5)
          report.push_back("gradient of inequality " + std::to_string(i + 1) +
                           " disagrees with finite differences");
    }
  }
  return report;
}

}  // namespace cvi
