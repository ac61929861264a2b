#pragma once

#include <map>
#include <string>
#include <vector>

#include "cvi/core.hpp"

namespace cvi {

namespace metric {
inline constexpr const char* kDistToSolution = "dist_to_solution";
inline constexpr const char* kRelativeError = "relative_error";
inline constexpr const char* kGap = "gap";
inline constexpr const char* kConsensusResidual = "consensus_residual";
inline constexpr const char* kLemmaResidual = "lemma_residual";
}  // namespace metric

/// Column order used by every CSV writer.
const std::vector<std::string>& metric_names();

/// max over the feasible set of ⟨F(x), x − z⟩, evaluated with the LMO.
/// Throws Error(MissingLMO).
double gap(const ProblemInstance& problem, const Vector& x);

/// ‖x − x⋆‖ / ‖x⋆‖. Throws Error(ZeroReference) when x⋆ = 0.
double relative_error(const Vector& x, const Vector& x_star);

double dist_to_solution(const Vector& x, const Vector& x_star);

/// (1/2β)‖λ_{k+1} − λ_k‖² + (β/2)‖y_{k+1} − y_k‖²
double lemma_residual(const Vector& lambda_k, const Vector& lambda_next, const Vector& y_k,
                      const Vector& y_next, double beta);

/**
 * Fills the metrics of `record` that the problem supports: distance and
 * relative error need a known solution (relative error also a non-zero one),
 * gap needs an LMO, consensus residual needs y.
 */
void annotate_metrics(const ProblemInstance& problem, TraceRecord& record);

}  // namespace cvi
