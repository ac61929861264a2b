#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "cvi/core.hpp"
#include "cvi/error.hpp"

namespace cvi {

/// Above this dimension P_c is applied through triangular solves instead of
/// being materialized.
inline constexpr Index kDenseProjectorMaxDim = 2000;

/**
 * Euclidean projection onto the affine set {x : C x = d}, realized as
 * x ↦ P_c x + d_c with
 *
 *   P_c = I − Cᵀ(CCᵀ)⁻¹C,   d_c = Cᵀ(CCᵀ)⁻¹d.
 *
 * (CCᵀ)⁻¹ is never formed: with CCᵀ = LLᵀ and W = L⁻¹C we get P_c = I − WᵀW.
 */
template <typename Scalar>
class EqualityProjector {
 public:
  using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  EqualityProjector() = default;

  Index dim() const { return n_; }
  bool has_equalities() const { return C_.rows() > 0; }
  bool is_dense() const { return P_.has_value(); }

  const MatrixS& C() const { return C_; }
  const VectorS& d() const { return d_; }
  const VectorS& d_c() const { return d_c_; }
  const Eigen::LLT<MatrixS>& chol_CCt() const { return chol_; }

  /// Dense P_c; materialized on demand for the implicit path.
  MatrixS P_c() const {
    if (P_) return *P_;
    return apply(MatrixS::Identity(n_, n_));
  }

  /// P_c · V for a vector or a matrix of columns.
  template <typename Derived>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> apply(
      const Eigen::MatrixBase<Derived>& v) const {
    if (!has_equalities()) return v;
    if (P_) return (*P_) * v;
    return v - C_.transpose() * chol_.solve(C_ * v);
  }

  template <typename DC, typename DD>
  static EqualityProjector build(const Eigen::MatrixBase<DC>& C, const Eigen::MatrixBase<DD>& d,
                                 std::optional<bool> dense);

 private:
  Index n_ = 0;
  MatrixS C_;
  VectorS d_;
  Eigen::LLT<MatrixS> chol_;
  std::optional<MatrixS> P_;
  VectorS d_c_;
};

template <typename Scalar>
template <typename DC, typename DD>
EqualityProjector<Scalar> EqualityProjector<Scalar>::build(const Eigen::MatrixBase<DC>& C,
                                                           const Eigen::MatrixBase<DD>& d,
                                                           std::optional<bool> dense) {
  const Index p = C.rows();
  const Index n = C.cols();
  if (d.size() != p) throw Error(ErrorKind::InvalidArgument, "equality rhs has wrong length");
  if (p > n) throw Error(ErrorKind::RankDeficient, "more equality rows than variables");

  EqualityProjector proj;
  proj.n_ = n;
  proj.C_ = C.template cast<Scalar>();
  proj.d_ = d.template cast<Scalar>();
  const bool want_dense = dense.value_or(n <= kDenseProjectorMaxDim);
  if (p == 0) {
    proj.d_c_ = VectorS::Zero(n);
    if (want_dense) proj.P_ = MatrixS::Identity(n, n);
    return proj;
  }

  const MatrixS CCt = proj.C_ * proj.C_.transpose();
  proj.chol_.compute(CCt);
  if (proj.chol_.info() != Eigen::Success)
    throw Error(ErrorKind::RankDeficient, "C Cᵀ is not positive definite");
  // LLT succeeds on some numerically singular matrices; reject tiny pivots.
  const VectorS diag = proj.chol_.matrixLLT().diagonal().cwiseAbs();
  const Scalar ratio = diag.minCoeff() / diag.maxCoeff();
  if (!(ratio * ratio > Scalar(p) * std::numeric_limits<Scalar>::epsilon()))
    throw Error(ErrorKind::RankDeficient, "C is numerically rank deficient");

  const MatrixS W = proj.chol_.matrixL().solve(proj.C_);
  proj.d_c_ = W.transpose() * proj.chol_.matrixL().solve(proj.d_);
  if (want_dense) {
    MatrixS P = MatrixS::Identity(n, n) - W.transpose() * W;
    proj.P_ = (P + P.transpose()) / Scalar(2);
  }
  return proj;
}

/**
 * Builds the projector for C x = d. `dense` forces the representation; by
 * default P_c is dense for n ≤ kDenseProjectorMaxDim.
 *
 * Throws Error(RankDeficient) when CCᵀ is not numerically positive definite.
 */
template <typename Scalar = double, typename DC, typename DD>
EqualityProjector<Scalar> build_equality_projector(const Eigen::MatrixBase<DC>& C,
                                                   const Eigen::MatrixBase<DD>& d,
                                                   std::optional<bool> dense = std::nullopt) {
  return EqualityProjector<Scalar>::build(C, d, dense);
}

/// Euclidean projection of v onto {x : C x = d}.
template <typename Scalar, typename Derived>
typename EqualityProjector<Scalar>::VectorS affine_project(const EqualityProjector<Scalar>& proj,
                                                           const Eigen::MatrixBase<Derived>& v) {
  if (v.size() != proj.dim()) throw Error(ErrorKind::InvalidArgument, "vector length mismatch");
  if (!proj.has_equalities()) return v;
  return proj.apply(v) + proj.d_c();
}

struct NewtonOptions {
  double tol = 1e-10;
  int max_iters = 100;
  /// Backtracking stops below this step length.
  double min_step = 0x1.0p-30;
  /// Sufficient decrease factor.
  double armijo = 1e-4;
  /// When set, residual is the gradient of this convex objective and the line
  /// search also accepts Armijo decrease of the objective.
  std::function<double(const Vector&)> objective;
};

struct NewtonResult {
  Vector x;
  int iterations = 0;
  double residual_inf = 0.0;
};

/**
 * Damped Newton for residual(x) = 0.
 *
 * Each step solves J dx = −r and backtracks by halving until the trial point
 * satisfies the guard and ‖r‖₂ decreases sufficiently. The guard is always
 * checked before the residual is evaluated at a trial point. Converges when
 * ‖r‖∞ ≤ tol.
 *
 * Throws Error(MaxIterationsExceeded) when the budget is exhausted or the
 * line search stalls, Error(SingularJacobian) when J cannot be factorized,
 * Error(InfeasibleWarmStart) when x0 violates the guard.
 */
NewtonResult damped_newton_root(const std::function<Vector(const Vector&)>& residual,
                                const std::function<Matrix(const Vector&)>& jacobian,
                                const Vector& x0, const NewtonOptions& options = {},
                                const std::function<bool(const Vector&)>& feasibility_guard = {});

}  // namespace cvi
