#pragma once

#include "cvi/core.hpp"
#include "cvi/linops.hpp"

namespace cvi {

/// x − y_k + (1/β)(F(x) + λ_k) − (μ/β) Σ ∇φᵢ(x)/φᵢ(x)
Vector x_barrier_residual(const VectorField& F, const ConstraintSpec& cs, const Vector& x,
                          const Vector& y_k, const Vector& lambda_k, double beta, double mu);

/**
 * x-update of v-ACVI. F is evaluated at the unknown itself, so this is a
 * nonlinear root problem solved by damped Newton under the guard φ(x) < 0.
 *
 * Throws Error(InfeasibleWarmStart) when `warm` is not strictly feasible and
 * propagates Newton failures.
 */
Vector solve_x_barrier(const VectorField& F, const ConstraintSpec& cs, const Vector& y_k,
                       const Vector& lambda_k, double beta, double mu, const Vector& warm,
                       double tol = 1e-10, int max_iters = 100);

/**
 * v-ACVI: barrier in the x-update, y = P_c(x + λ/β) + d_c, λ as in ACVI.
 * Uses the μ schedule, tolerances and initial iterates of `config`; the
 * x- and y-solver choices do not apply.
 */
SolverTrace vacvi_run(const ProblemInstance& problem, const AcviConfig& config,
                      const RunLimits& limits = {});

}  // namespace cvi
