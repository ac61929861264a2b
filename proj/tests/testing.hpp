#pragma once

// Independent reference computations for the test suite. Nothing here calls
// into the solver code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "cvi/random.hpp"

namespace cvi::testing {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Seeded generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return rng_.uniform(lo, hi); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_.next_u64() % (hi - lo + 1)); }
  Vec vector(Eigen::Index n, double scale = 1.0) { return scale * rng_.gaussian_vector(n); }
  Mat matrix(Eigen::Index rows, Eigen::Index cols) { return rng_.gaussian_matrix(rows, cols); }
  Vec uniform_vector(Eigen::Index n, double lo, double hi) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

/**
 * argmin ½‖x − v‖² s.t. A x ≤ b, E x = f by enumerating every active set of
 * the inequalities. Exponential in the number of rows; meant for m ≤ 14.
 */
inline Vec brute_force_qp(const Vec& v, const Mat& A, const Vec& b, const Mat& E, const Vec& f) {
  const Eigen::Index n = v.size();
  const Eigen::Index m = A.rows();
  Vec best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < m; ++j)
      if (mask & (1ul << j)) active.push_back(j);
    const Eigen::Index rows = E.rows() + static_cast<Eigen::Index>(active.size());
    if (rows > n) continue;
    Mat M(rows, n);
    Vec r(rows);
    if (E.rows() > 0) {
      M.topRows(E.rows()) = E;
      r.head(E.rows()) = f;
    }
    for (std::size_t i = 0; i < active.size(); ++i) {
      M.row(E.rows() + i) = A.row(active[i]);
      r[E.rows() + i] = b[active[i]];
    }
    Vec x = v;
    if (rows > 0) {
      const Mat MMt = M * M.transpose();
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(MMt);
      const Vec nu = cod.solve(M * v - r);
      x = v - M.transpose() * nu;
      if ((M * x - r).lpNorm<Eigen::Infinity>() > 1e-9) continue;
    }
    if (m > 0 && (A * x - b).maxCoeff() > 1e-11) continue;
    const double dist = (x - v).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

/// Root of a monotone increasing scalar function on (lo, hi) by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iterations = 200) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Euclidean projection onto the ball by bisection on the KKT multiplier.
inline Vec ball_projection_bisection(const Vec& v, const Vec& c, double r) {
  if ((v - c).norm() <= r) return v;
  const double nu = bisect([&](double t) { return r - (v - c).norm() / (1.0 + t); }, 0.0, 1e12);
  return c + (v - c) / (1.0 + nu);
}

/// Central-difference Jacobian.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& x, double h = 1e-6) {
  const Vec f0 = F(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (F(xp) - F(xm)) / (2 * h);
  }
  return J;
}

/// Central-difference gradient of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

/// max |a − b| / max(1, max |b|)
inline double relative_deviation(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

/**
 * Minimizes ‖G(x)‖∞ over the plane by repeated grid search around the best
 * point, shrinking the window each round.
 */
inline Vec grid_root_2d(const std::function<Vec(const Vec&)>& G, Vec center, double half_width,
                        int rounds = 60) {
  const int points = 21;
  for (int round = 0; round < rounds; ++round) {
    Vec best = center;
    double best_val = G(center).lpNorm<Eigen::Infinity>();
    for (int i = 0; i < points; ++i) {
      for (int j = 0; j < points; ++j) {
        Vec x(2);
        x << center[0] + half_width * (2.0 * i / (points - 1) - 1.0),
            center[1] + half_width * (2.0 * j / (points - 1) - 1.0);
        const double val = G(x).lpNorm<Eigen::Infinity>();
        if (val < best_val) {
          best_val = val;
          best = x;
        }
      }
    }
    center = best;
    half_width *= 0.5;
  }
  return center;
}

}  // namespace cvi::testing
