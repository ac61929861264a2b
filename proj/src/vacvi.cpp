#include "cvi/vacvi.hpp"

#include <algorithm>

#include "cvi/acvi.hpp"
#include "cvi/metrics.hpp"

namespace cvi {

Vector x_barrier_residual(const VectorField& F, const ConstraintSpec& cs, const Vector& x,
                          const Vector& y_k, const Vector& lambda_k, double beta, double mu) {
  Vector r = x - y_k + (F(x) + lambda_k) / beta;
  for (const Inequality& phi : cs.inequalities)
    r -= (mu / beta) * phi.gradient(x) / phi.value(x);
  return r;
}

namespace {

Matrix x_barrier_jacobian(const VectorField& F, const ConstraintSpec& cs, const Vector& x,
                          double beta, double mu) {
  const Index n = x.size();
  if (!F.has_jacobian())
    throw Error(ErrorKind::InvalidArgument, "v-ACVI needs an analytic Jacobian of F");
  Matrix J = Matrix::Identity(n, n) + F.jacobian(x) / beta;
  for (const Inequality& phi : cs.inequalities) {
    const double v = phi.value(x);
    const Vector g = phi.gradient(x);
    J += (mu / (beta * v * v)) * g * g.transpose();
    if (phi.hessian) J -= (mu / (beta * v)) * phi.hessian(x);
  }
  return J;
}

}  // namespace

Vector solve_x_barrier(const VectorField& F, const ConstraintSpec& cs, const Vector& y_k,
                       const Vector& lambda_k, double beta, double mu, const Vector& warm,
                       double tol, int max_iters) {
  const auto residual = [&](const Vector& x) {
    return x_barrier_residual(F, cs, x, y_k, lambda_k, beta, mu);
  };
  const auto jacobian = [&](const Vector& x) { return x_barrier_jacobian(F, cs, x, beta, mu); };
  const auto guard = [&](const Vector& x) { return cs.strictly_feasible(x); };
  NewtonOptions options;
  options.tol = tol;
  options.max_iters = max_iters;
  return damped_newton_root(residual, jacobian, warm, options, guard).x;
}

SolverTrace vacvi_run(const ProblemInstance& problem, const AcviConfig& config,
                      const RunLimits& limits) {
  if (auto issues = config.validate(); !issues.empty())
    throw Error(ErrorKind::InvalidArgument, issues.front());
  const Index n = problem.dim();
  const ConstraintSpec& cs = problem.constraints;
  const auto proj = build_equality_projector(cs.C, cs.d);

  Vector x = config.x_init.value_or(problem.interior_point);
  Vector y = config.y_init.value_or(problem.interior_point);
  Vector lambda = config.lambda_init.value_or(Vector::Zero(n));
  if (x.size() != n || y.size() != n || lambda.size() != n)
    throw Error(ErrorKind::InvalidArgument, "initial iterates have wrong length");
  if (!cs.strictly_feasible(x))
    throw Error(ErrorKind::InfeasibleWarmStart, "initial x is not strictly feasible");

  SolverTrace trace;
  trace.method = "vacvi";
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
      try {
        x = solve_x_barrier(problem.field, cs, y, lambda, config.beta, mu, x,
                            config.tol_subproblem, config.newton_max_iters);
      } catch (const Error& e) {
        throw e.with_context(t, k);
      }
      Vector y_next = affine_project(proj, Vector(x + lambda / config.beta));
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

}  // namespace cvi
