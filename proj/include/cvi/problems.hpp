#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cvi/core.hpp"
#include "cvi/random.hpp"

namespace cvi {

/// Bilinear game on the nonnegative quadrant, solution (0, 0).
ProblemInstance make_cbg();

/// Ratio game ⟨x,Ry⟩/⟨x,Sy⟩ with both players on the 2-simplex.
ProblemInstance make_ratio_game();

enum class ForsakenConstraint { Ball4, X1Min, X2Min };

/// The "forsaken" game; non-monotone, no known solution.
ProblemInstance make_forsaken(ForsakenConstraint constraint = ForsakenConstraint::Ball4);

/// Toy GAN with sample moments drawn once from a seeded generator.
ProblemInstance make_toy_gan(int num_samples = 1000, std::uint64_t seed = 0);

/// Toy GAN with the sample moments mean(x²) and mean(z²) given directly.
ProblemInstance make_toy_gan_from_moments(double mean_x2, double mean_z2);

/// High-dimensional bilinear game over two probability simplices of n/2
/// coordinates each. `seed` only affects the interior point.
ProblemInstance make_hbg(double eta, Index n = 1000, std::uint64_t seed = 0);

/// Matrices (A, B, C) of the generalized bilinear games.
struct GhbgMatrices {
  Matrix A;
  Matrix B;
  Matrix C;
};

/// A, C = MᵀM/λ_max(MᵀM) and B/‖B‖₂ for Gaussian M and B, drawn in that order.
GhbgMatrices make_ghbg_matrices(Index n_per_player, Rng& rng);

/// Generalized HBG on {x ≥ −e, eᵀxᵢ = 0} per player, solution 0.
ProblemInstance make_ghbg(double eta, std::uint64_t seed = 0, Index n_per_player = 500);

/// Generalized HBG on the box [−100, 100] with random equalities Cᵢxᵢ = 0.
ProblemInstance make_gghbg(double eta, std::uint64_t seed = 0, Index n_per_player = 500,
                           Index rows_per_player = 10);

/// Strictly feasible point drawn around the interior point (shrunk toward it
/// until strictly feasible, equalities preserved).
Vector sample_feasible(const ProblemInstance& problem, Rng& rng, double scale = 1.0);

/// Names accepted by make_problem.
const std::vector<std::string>& problem_names();

/**
 * Builds a benchmark by name. Recognized parameters: eta, n (total for hbg,
 * per player for ghbg/gghbg), rows, samples, constraint (ball4, x1_min,
 * x2_min). Unknown names or parameters throw Error(InvalidArgument).
 */
ProblemInstance make_problem(const std::string& name,
                             const std::map<std::string, std::string>& params, std::uint64_t seed);

}  // namespace cvi
