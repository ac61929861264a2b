#include "cvi/acvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cvi/metrics.hpp"

namespace cvi {

namespace {

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x) {
  const Index n = x.size();
  Matrix J(n, n);
  Vector xp = x;
  Vector xm = x;
  for (Index j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

Matrix field_jacobian(const VectorField& F, const Vector& x) {
  if (F.has_jacobian()) return F.jacobian(x);
  return fd_jacobian(F.eval, x);
}

/// y on (l, ∞) minimizing −a log(y − l) + ½(y − c)².
double lower_prox(double c, double l, double a) {
  const double s = c - l;
  const double root = std::sqrt(s * s + 4.0 * a);
  return l + (s >= 0.0 ? 0.5 * (s + root) : 2.0 * a / (root - s));
}

double box_prox(double c, double l, double u, double a) {
  const bool has_l = std::isfinite(l);
  const bool has_u = std::isfinite(u);
  if (!has_l && !has_u) return c;
  if (!has_u) return lower_prox(c, l, a);
  if (!has_l) return -lower_prox(-c, -u, a);
  const auto g = [=](double y) { return -a / (y - l) + a / (u - y) + (y - c); };
  const auto dg = [=](double y) {
    return a / ((y - l) * (y - l)) + a / ((u - y) * (u - y)) + 1.0;
  };
  const double guess = (c > l && c < u) ? c : 0.5 * (l + u);
  return increasing_root(g, dg, l, u, guess);
}

Vector ball_prox(const Vector& c, const Vector& center, double radius, double a) {
  const Vector w = c - center;
  const double nw = w.norm();
  if (nw == 0.0) return center;
  const double r2 = radius * radius;
  const auto h = [=](double rho) { return rho + 2.0 * a * rho / (r2 - rho * rho) - nw; };
  const auto dh = [=](double rho) {
    const double q = r2 - rho * rho;
    return 1.0 + 2.0 * a * (r2 + rho * rho) / (q * q);
  };
  const double hi = std::min(radius, nw);
  const double rho = increasing_root(h, dh, 0.0, hi, 0.5 * hi);
  return center + (rho / nw) * w;
}

/// Per-coordinate bounds implied by the structural tag, if it is separable.
std::optional<std::pair<Vector, Vector>> coordinate_bounds(const ConstraintSpec& cs) {
  const Index n = cs.dim();
  const double inf = std::numeric_limits<double>::infinity();
  if (std::holds_alternative<tags::Orthant>(cs.tag) || std::holds_alternative<tags::Simplex>(cs.tag))
    return std::make_pair(Vector::Zero(n), Vector::Constant(n, inf));
  if (std::holds_alternative<tags::ShiftedSimplex>(cs.tag))
    return std::make_pair(Vector::Constant(n, -1.0), Vector::Constant(n, inf));
  if (const auto* box = std::get_if<tags::Box>(&cs.tag)) return std::make_pair(box->lower, box->upper);
  return std::nullopt;
}

Matrix y_objective_hessian(const ConstraintSpec& cs, const Vector& y, double beta, double mu) {
  const Index n = y.size();
  Matrix H = beta * Matrix::Identity(n, n);
  for (const Inequality& phi : cs.inequalities) {
    const double v = phi.value(y);
    const Vector g = phi.gradient(y);
    H += (mu / (v * v)) * g * g.transpose();
    Matrix hess = phi.hessian ? phi.hessian(y) : fd_jacobian(phi.gradient, y);
    H -= (mu / v) * hess;
  }
  return H;
}

/// −μ Σ log(−φᵢ(y)) + (β/2)‖y − x_next − λ_k/β‖²; y must be strictly feasible.
double y_objective(const ConstraintSpec& cs, const Vector& y, const Vector& x_next,
                   const Vector& lambda_k, double beta, double mu) {
  double value = 0.5 * beta * (y - x_next - lambda_k / beta).squaredNorm();
  for (const Inequality& phi : cs.inequalities) value -= mu * std::log(-phi.value(y));
  return value;
}

Vector y_newton(const ConstraintSpec& cs, const Vector& x_next, const Vector& lambda_k,
                double beta, double mu, const YSolveOptions& options) {
  if (!options.warm)
    throw Error(ErrorKind::InvalidArgument, "Newton y-solver needs a warm start");
  const auto residual = [&](const Vector& y) {
    return y_objective_gradient(cs, y, x_next, lambda_k, beta, mu);
  };
  const auto jacobian = [&](const Vector& y) { return y_objective_hessian(cs, y, beta, mu); };
  const auto guard = [&](const Vector& y) { return cs.strictly_feasible(y); };
  NewtonOptions nopt;
  nopt.tol = options.tol;
  nopt.max_iters = options.max_iters;
  nopt.objective = [&](const Vector& y) { return y_objective(cs, y, x_next, lambda_k, beta, mu); };
  return damped_newton_root(residual, jacobian, *options.warm, nopt, guard).x;
}

/// l steps of GDA or EG on G, warm-started at x.
Vector inner_x_steps(const VectorField& F, const EqualityProjector<double>& proj,
                     const Vector& y_k, const Vector& lambda_k, double beta,
                     const InnerFirstOrderOptions& inner, Vector x) {
  const auto G = [&](const Vector& z) {
    return x_subproblem_residual(F, proj, z, y_k, lambda_k, beta);
  };
  for (int s = 0; s < inner.steps; ++s) {
    if (inner.optimizer == InnerOptimizer::Gda) {
      x -= inner.eta_x * G(x);
    } else {
      const Vector half = x - inner.eta_x * G(x);
      x -= inner.eta_x * G(half);
    }
  }
  return x;
}

/// l gradient steps on the y objective; each step halves η_y until the trial
/// point is strictly feasible and satisfies the Armijo condition.
Vector inner_y_steps(const ConstraintSpec& cs, const Vector& x_next, const Vector& lambda_k,
                     double beta, double mu, const InnerFirstOrderOptions& inner, Vector y) {
  constexpr double kArmijo = 1e-4;
  double value = y_objective(cs, y, x_next, lambda_k, beta, mu);
  for (int s = 0; s < inner.steps; ++s) {
    const Vector g = y_objective_gradient(cs, y, x_next, lambda_k, beta, mu);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) break;
    double eta = inner.eta_y;
    for (int halvings = 0; halvings < 60; ++halvings, eta *= 0.5) {
      const Vector trial = y - eta * g;
      if (!cs.strictly_feasible(trial)) continue;
      const double trial_value = y_objective(cs, trial, x_next, lambda_k, beta, mu);
      if (trial_value <= value - kArmijo * eta * g2) {
        y = trial;
        value = trial_value;
        break;
      }
    }
  }
  return y;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

}  // namespace

Vector x_subproblem_residual(const VectorField& F, const EqualityProjector<double>& proj,
                             const Vector& x, const Vector& y_k, const Vector& lambda_k,
                             double beta) {
  return x + proj.apply((F(x) + lambda_k) / beta - y_k) - proj.d_c();
}

Vector y_objective_gradient(const ConstraintSpec& cs, const Vector& y, const Vector& x_next,
                            const Vector& lambda_k, double beta, double mu) {
  Vector g = beta * (y - x_next) - lambda_k;
  for (const Inequality& phi : cs.inequalities) g -= (mu / phi.value(y)) * phi.gradient(y);
  return g;
}

AffineXSolver::AffineXSolver(const AffineForm& F, const EqualityProjector<double>& proj,
                             double beta)
    : proj_(&proj), beta_(beta) {
  const Index n = F.A.rows();
  M_ = Matrix::Identity(n, n) + proj.apply(F.A) / beta;
  Pb_ = proj.apply(F.b);
  lu_.compute(M_);
  if (!(lu_.rcond() > 1e-14))
    throw Error(ErrorKind::SingularSystem, "I + P_c A / beta is singular; F is not monotone");
}

Vector AffineXSolver::solve(const Vector& y_k, const Vector& lambda_k) const {
  const Vector rhs = proj_->apply(y_k - lambda_k / beta_) - Pb_ / beta_ + proj_->d_c();
  Vector x = lu_.solve(rhs);
  x += lu_.solve(rhs - M_ * x);
  return x;
}

Vector solve_x_subproblem(const VectorField& F, const EqualityProjector<double>& proj,
                          const Vector& y_k, const Vector& lambda_k, double beta,
                          const XSolveOptions& options) {
  XSolver mode = options.mode;
  if (mode == XSolver::Auto) mode = F.affine ? XSolver::AffineClosedForm : XSolver::Newton;
  switch (mode) {
    case XSolver::AffineClosedForm: {
      if (!F.affine) throw Error(ErrorKind::InvalidArgument, "field has no affine form");
      return AffineXSolver(*F.affine, proj, beta).solve(y_k, lambda_k);
    }
    case XSolver::InnerFirstOrder: {
      if (!options.warm)
        throw Error(ErrorKind::InvalidArgument, "inner first-order mode needs a warm start");
      return inner_x_steps(F, proj, y_k, lambda_k, beta, options.inner, *options.warm);
    }
    default: {
      const auto residual = [&](const Vector& x) {
        return x_subproblem_residual(F, proj, x, y_k, lambda_k, beta);
      };
      const auto jacobian = [&](const Vector& x) -> Matrix {
        const Index n = x.size();
        return Matrix::Identity(n, n) + proj.apply(field_jacobian(F, x)) / beta;
      };
      NewtonOptions nopt;
      nopt.tol = options.tol;
      nopt.max_iters = options.max_iters;
      return damped_newton_root(residual, jacobian, options.warm.value_or(y_k), nopt).x;
    }
  }
}

Vector solve_y_subproblem(const ConstraintSpec& cs, const Vector& x_next, const Vector& lambda_k,
                          double beta, double mu, const YSolveOptions& options) {
  if (!(mu > 0.0) || !(beta > 0.0))
    throw Error(ErrorKind::InvalidArgument, "mu and beta must be positive");
  if (options.warm && !cs.strictly_feasible(*options.warm))
    throw Error(ErrorKind::InfeasibleWarmStart, "y warm start is not strictly feasible");
  if (options.mode == YSolver::DampedNewton) return y_newton(cs, x_next, lambda_k, beta, mu, options);

  const Vector c = x_next + lambda_k / beta;
  const double a = mu / beta;
  if (auto bounds = coordinate_bounds(cs)) {
    const auto& [lower, upper] = *bounds;
    Vector y(c.size());
    for (Index j = 0; j < c.size(); ++j) y[j] = box_prox(c[j], lower[j], upper[j], a);
    return y;
  }
  if (const auto* ball = std::get_if<tags::EuclideanBall>(&cs.tag))
    return ball_prox(c, ball->center, ball->radius, a);
  if (cs.num_inequalities() == 0) return c;
  return y_newton(cs, x_next, lambda_k, beta, mu, options);
}

Vector update_lambda(const Vector& lambda_k, const Vector& x_next, const Vector& y_next,
                     double beta) {
  if (lambda_k.size() != x_next.size() || x_next.size() != y_next.size())
    throw Error(ErrorKind::InvalidArgument, "update_lambda: length mismatch");
  return lambda_k + beta * (x_next - y_next);
}

double increasing_root(const std::function<double(double)>& f,
                       const std::function<double(double)>& df, double lo, double hi,
                       double guess) {
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    double next = x - fx / df(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x))
      return next;
    x = next;
  }
  return x;
}

std::string describe(const AcviConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "beta=" << config.beta << " mu_init=" << config.mu_init << " delta=" << config.delta
      << " schedule=";
  for (std::size_t i = 0; i < config.inner_schedule.size(); ++i)
    out << (i ? "," : "") << config.inner_schedule[i];
  if (config.mu_fixed) out << " mu_fixed=" << *config.mu_fixed;
  if (config.x_solver == XSolver::InnerFirstOrder)
    out << " inner_steps=" << config.inner.steps << " eta_x=" << config.inner.eta_x
        << " eta_y=" << config.inner.eta_y;
  return out.str();
}

SolverTrace acvi_run(const ProblemInstance& problem, const AcviConfig& config,
                     const RunLimits& limits) {
  if (auto issues = config.validate(); !issues.empty())
    throw Error(ErrorKind::InvalidArgument, join(issues));
  const Index n = problem.dim();
  const ConstraintSpec& cs = problem.constraints;
  const auto proj = build_equality_projector(cs.C, cs.d);
  const bool inexact = config.x_solver == XSolver::InnerFirstOrder;

  Vector y = config.y_init.value_or(problem.interior_point);
  Vector lambda = config.lambda_init.value_or(Vector::Zero(n));
  Vector x = config.x_init.value_or(y);
  if (y.size() != n || lambda.size() != n || x.size() != n)
    throw Error(ErrorKind::InvalidArgument, "initial iterates have wrong length");
  if (!cs.strictly_feasible(y))
    throw Error(ErrorKind::InfeasibleWarmStart, "initial y is not strictly feasible");

  XSolver mode = config.x_solver;
  if (mode == XSolver::Auto) mode = problem.field.affine ? XSolver::AffineClosedForm : XSolver::Newton;
  if (mode == XSolver::AffineClosedForm && !problem.field.affine)
    throw Error(ErrorKind::InvalidArgument, "affine x-solver requested for a non-affine field");
  std::optional<AffineXSolver> affine;
  if (mode == XSolver::AffineClosedForm) affine.emplace(*problem.field.affine, proj, config.beta);

  XSolveOptions xopt;
  xopt.mode = mode;
  xopt.tol = config.tol_subproblem;
  xopt.max_iters = config.newton_max_iters;
  xopt.inner = config.inner;
  YSolveOptions yopt;
  yopt.mode = config.y_solver;
  yopt.tol = config.tol_subproblem;
  yopt.max_iters = config.newton_max_iters;

  SolverTrace trace;
  trace.method = inexact ? "acvi-inexact" : "acvi";
  trace.config_echo = describe(config);
  TraceRecorder recorder(trace, limits);

  const auto make_record = [&](int t, int k, long iter) {
    TraceRecord rec;
    rec.t = t;
    rec.k = k;
    rec.iter = iter;
    rec.x = x;
    rec.y = y;
    rec.lambda = lambda;
    annotate_metrics(problem, rec);
    return rec;
  };
  if (!recorder.push(make_record(0, 0, 0))) return trace;

  double mu = config.mu_init;
  long iter = 0;
  for (int t = 0; t < static_cast<int>(config.inner_schedule.size()); ++t) {
    mu = config.mu_fixed ? *config.mu_fixed : std::max(config.delta * mu, kMuFloor);
    for (int k = 0; k < config.inner_schedule[t]; ++k) {
      if (!recorder.update_budget_left(iter)) return trace;
      Vector y_next;
      try {
        if (affine) {
          x = affine->solve(y, lambda);
        } else {
          xopt.warm = x;
          x = solve_x_subproblem(problem.field, proj, y, lambda, config.beta, xopt);
        }
        if (inexact) {
          y_next = inner_y_steps(cs, x, lambda, config.beta, mu, config.inner, y);
        } else {
          yopt.warm = y;
          y_next = solve_y_subproblem(cs, x, lambda, config.beta, mu, yopt);
        }
      } catch (const Error& e) {
        throw e.with_context(t, k);
      }
      Vector lambda_next = update_lambda(lambda, x, y_next, config.beta);
      const double lr = lemma_residual(lambda, lambda_next, y, y_next, config.beta);
      y = std::move(y_next);
      lambda = std::move(lambda_next);
      ++iter;
      TraceRecord rec = make_record(t, k + 1, iter);
      rec.metrics[metric::kLemmaResidual] = lr;
      if (!recorder.push(std::move(rec))) return trace;
    }
  }
  return trace;
}

SolverTrace acvi_inexact_run(const ProblemInstance& problem, AcviConfig config,
                             const RunLimits& limits) {
  config.x_solver = XSolver::InnerFirstOrder;
  return acvi_run(problem, config, limits);
}

}  // namespace cvi
