#include "cvi/metrics.hpp"

namespace cvi {

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{metric::kDistToSolution, metric::kRelativeError,
                                              metric::kGap, metric::kConsensusResidual,
                                              metric::kLemmaResidual};
  return names;
}

double gap(const ProblemInstance& problem, const Vector& x) {
  if (!problem.has_lmo())
    throw Error(ErrorKind::MissingLMO, "problem " + problem.name + " has no LMO");
  const Vector r = problem.field(x);
  return r.dot(x) - r.dot(problem.lmo(r));
}

double relative_error(const Vector& x, const Vector& x_star) {
  const double scale = x_star.norm();
  if (scale == 0.0)
    throw Error(ErrorKind::ZeroReference, "relative error against a zero reference");
  return (x - x_star).norm() / scale;
}

double dist_to_solution(const Vector& x, const Vector& x_star) { return (x - x_star).norm(); }

double lemma_residual(const Vector& lambda_k, const Vector& lambda_next, const Vector& y_k,
                      const Vector& y_next, double beta) {
  return (lambda_next - lambda_k).squaredNorm() / (2.0 * beta) +
         0.5 * beta * (y_next - y_k).squaredNorm();
}

void annotate_metrics(const ProblemInstance& problem, TraceRecord& record) {
  if (problem.known_solution) {
    const Vector& xs = *problem.known_solution;
    record.metrics[metric::kDistToSolution] = dist_to_solution(record.x, xs);
    if (xs.norm() > 0.0) record.metrics[metric::kRelativeError] = relative_error(record.x, xs);
  }
  if (problem.has_lmo()) record.metrics[metric::kGap] = gap(problem, record.x);
  if (record.y) record.metrics[metric::kConsensusResidual] = (record.x - *record.y).norm();
}

}  // namespace cvi
