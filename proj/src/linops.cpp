#include "cvi/linops.hpp"

#include <cmath>
#include <string>

namespace cvi {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

NewtonResult damped_newton_root(const std::function<Vector(const Vector&)>& residual,
                                const std::function<Matrix(const Vector&)>& jacobian,
                                const Vector& x0, const NewtonOptions& options,
                                const std::function<bool(const Vector&)>& feasibility_guard) {
  const auto admissible = [&](const Vector& x) {
    return !feasibility_guard || feasibility_guard(x);
  };
  if (!admissible(x0))
    throw Error(ErrorKind::InfeasibleWarmStart, "Newton start point violates the guard");

  NewtonResult result;
  result.x = x0;
  Vector r = residual(result.x);
  double r_norm = r.norm();
  double merit = options.objective ? options.objective(result.x) : 0.0;
  for (int it = 0;; ++it) {
    result.iterations = it;
    result.residual_inf = r.lpNorm<Eigen::Infinity>();
    if (!all_finite(r))
      throw Error(ErrorKind::SingularJacobian, "residual is not finite");
    if (result.residual_inf <= options.tol) return result;
    if (it >= options.max_iters)
      throw Error(ErrorKind::MaxIterationsExceeded,
                  "Newton did not converge in " + std::to_string(options.max_iters) +
                      " iterations (residual " + std::to_string(result.residual_inf) + ")");

    const Matrix J = jacobian(result.x);
    Eigen::PartialPivLU<Matrix> lu(J);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14))
      throw Error(ErrorKind::SingularJacobian, "Jacobian is singular (rcond " +
                                                   std::to_string(rcond) + ")");
    const Vector step = lu.solve(-r);
    if (!all_finite(step)) throw Error(ErrorKind::SingularJacobian, "Newton step is not finite");
    // With an objective, r is its gradient and r·step its directional derivative.
    const double slope = options.objective ? r.dot(step) : 0.0;

    double t = 1.0;
    bool accepted = false;
    while (t >= options.min_step) {
      const Vector trial = result.x + t * step;
      if (admissible(trial)) {
        Vector r_trial = residual(trial);
        const double trial_norm = r_trial.norm();
        // Near the root objective differences drown in rounding, so residual
        // decrease is always accepted as well.
        bool decrease = trial_norm <= (1.0 - options.armijo * t) * r_norm;
        double trial_merit = 0.0;
        if (options.objective) {
          trial_merit = options.objective(trial);
          decrease = decrease || (slope < 0.0 && trial_merit <= merit + options.armijo * t * slope);
        }
        if (all_finite(r_trial) && decrease) {
          result.x = trial;
          r = std::move(r_trial);
          r_norm = trial_norm;
          merit = trial_merit;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted)
      throw Error(ErrorKind::MaxIterationsExceeded,
                  "Newton line search stalled (residual " + std::to_string(result.residual_inf) +
                      ")");
  }
}

}  // namespace cvi
