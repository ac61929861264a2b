#include "cvi/problems.hpp"

#include <cmath>
#include <limits>

#include "cvi/linops.hpp"

namespace cvi {

namespace {

std::function<Vector(const Vector&)> simplex_lmo(std::vector<Index> blocks) {
  return [blocks](const Vector& r) {
    Vector s = Vector::Zero(r.size());
    Index offset = 0;
    for (Index len : blocks) {
      Index best = 0;
      r.segment(offset, len).minCoeff(&best);
      s[offset + best] = 1.0;
      offset += len;
    }
    return s;
  };
}

/// Vertices of {x ≥ −e, eᵀx = 0} have one coordinate at len − 1, the rest at −1.
std::function<Vector(const Vector&)> shifted_simplex_lmo(std::vector<Index> blocks) {
  return [blocks](const Vector& r) {
    Vector s = Vector::Constant(r.size(), -1.0);
    Index offset = 0;
    for (Index len : blocks) {
      Index best = 0;
      r.segment(offset, len).minCoeff(&best);
      s[offset + best] = static_cast<double>(len) - 1.0;
      offset += len;
    }
    return s;
  };
}

std::function<Vector(const Vector&)> ball_lmo(Vector center, double radius) {
  return [center, radius](const Vector& r) -> Vector {
    const double norm = r.norm();
    if (norm == 0.0) return center;
    return center - (radius / norm) * r;
  };
}

/// Positive vector with entries in [0.5, 1.5), normalized to the given sum.
Vector positive_block(Rng& rng, Index len, double total) {
  Vector v(len);
  for (Index j = 0; j < len; ++j) v[j] = rng.uniform(0.5, 1.5);
  return v * (total / v.sum());
}

double largest_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

/// [[ηA, (1−η)B], [−(1−η)Bᵀ, ηC]]
Matrix ghbg_operator(double eta, const GhbgMatrices& m) {
  const Index n = m.A.rows();
  Matrix op(2 * n, 2 * n);
  op.topLeftCorner(n, n) = eta * m.A;
  op.topRightCorner(n, n) = (1.0 - eta) * m.B;
  op.bottomLeftCorner(n, n) = -(1.0 - eta) * m.B.transpose();
  op.bottomRightCorner(n, n) = eta * m.C;
  return op;
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorKind::InvalidArgument, "eta must lie in (0, 1)");
}

}  // namespace

ProblemInstance make_cbg() {
  ProblemInstance p;
  p.name = "cbg";
  Matrix A(2, 2);
  A << 0.1, 1.0, -1.0, 0.1;
  p.field = VectorField::from_affine(A, Vector::Zero(2));
  p.field.lipschitz_hint = std::sqrt(1.01);
  p.constraints = ConstraintSpec::orthant(2);
  p.interior_point = Vector::Ones(2);
  p.known_solution = Vector::Zero(2);
  return p;
}

ProblemInstance make_ratio_game() {
  Matrix R(2, 2), S(2, 2);
  R << -0.6, -0.3, 0.6, -0.3;
  S << 0.9, 0.5, 0.8, 0.4;
  ProblemInstance p;
  p.name = "rg";
  p.field.dim = 4;
  // V = r/s with r = xᵀRy, s = xᵀSy; F = (∇ₓV, −∇ᵧV).
  p.field.eval = [R, S](const Vector& z) -> Vector {
    const Vector x = z.head(2), y = z.tail(2);
    const Vector u = R * y, v = S * y, pr = R.transpose() * x, q = S.transpose() * x;
    const double r = x.dot(u), s = x.dot(v);
    Vector F(4);
    F.head(2) = u / s - (r / (s * s)) * v;
    F.tail(2) = -(pr / s - (r / (s * s)) * q);
    return F;
  };
  p.field.jacobian = [R, S](const Vector& z) -> Matrix {
    const Vector x = z.head(2), y = z.tail(2);
    const Vector u = R * y, v = S * y, pr = R.transpose() * x, q = S.transpose() * x;
    const double r = x.dot(u), s = x.dot(v);
    const double s2 = s * s, s3 = s2 * s;
    Matrix J(4, 4);
    J.topLeftCorner(2, 2) =
        -(u * v.transpose() + v * u.transpose()) / s2 + (2.0 * r / s3) * v * v.transpose();
    J.topRightCorner(2, 2) = R / s - (u * q.transpose() + v * pr.transpose()) / s2 - (r / s2) * S +
                             (2.0 * r / s3) * v * q.transpose();
    J.bottomLeftCorner(2, 2) = -(R.transpose() / s -
                                 (pr * v.transpose() + q * u.transpose()) / s2 -
                                 (r / s2) * S.transpose() + (2.0 * r / s3) * q * v.transpose());
    J.bottomRightCorner(2, 2) =
        (pr * q.transpose() + q * pr.transpose()) / s2 - (2.0 * r / s3) * q * q.transpose();
    return J;
  };
  p.constraints = ConstraintSpec::simplex({2, 2});
  p.interior_point = Vector::Constant(4, 0.5);
  const double root17 = std::sqrt(17.0);
  const double a = (5.0 * root17 - 13.0) / 8.0;
  const double b = (5.0 * root17 - 19.0) / 32.0;
  p.known_solution = Vector(4);
  *p.known_solution << a, 1.0 - a, b, 1.0 - b;
  p.lmo = simplex_lmo({2, 2});
  p.default_metric = "gap";
  return p;
}

ProblemInstance make_forsaken(ForsakenConstraint constraint) {
  const auto dh = [](double z) { return z / 2.0 - 2.0 * z * z * z + std::pow(z, 5); };
  const auto d2h = [](double z) { return 0.5 - 6.0 * z * z + 5.0 * std::pow(z, 4); };
  ProblemInstance p;
  p.field.dim = 2;
  p.field.eval = [dh](const Vector& x) -> Vector {
    Vector F(2);
    F << x[1] - 0.45 + dh(x[0]), -x[0] + dh(x[1]);
    return F;
  };
  p.field.jacobian = [d2h](const Vector& x) -> Matrix {
    Matrix J(2, 2);
    J << d2h(x[0]), 1.0, -1.0, d2h(x[1]);
    return J;
  };
  const double inf = std::numeric_limits<double>::infinity();
  switch (constraint) {
    case ForsakenConstraint::Ball4:
      p.name = "forsaken";
      p.constraints = ConstraintSpec::ball(Vector::Zero(2), 2.0);
      p.lmo = ball_lmo(Vector::Zero(2), 2.0);
      p.default_metric = "gap";
      break;
    case ForsakenConstraint::X1Min:
      p.name = "forsaken-x1min";
      p.constraints = ConstraintSpec::box(Vector{{0.08, -inf}}, Vector{{inf, inf}});
      p.default_metric = "consensus_residual";
      break;
    case ForsakenConstraint::X2Min:
      p.name = "forsaken-x2min";
      p.constraints = ConstraintSpec::box(Vector{{-inf, 0.4}}, Vector{{inf, inf}});
      p.default_metric = "consensus_residual";
      break;
  }
  p.interior_point = Vector::Constant(2, 0.5);
  return p;
}

ProblemInstance make_toy_gan_from_moments(double mean_x2, double mean_z2) {
  ProblemInstance p;
  p.name = "toy-gan";
  p.field.dim = 2;
  // Coordinates (θ, φ).
  p.field.eval = [mean_x2, mean_z2](const Vector& v) -> Vector {
    const double theta = v[0], phi = v[1];
    Vector F(2);
    F << -2.0 * phi * theta * mean_z2, -(mean_x2 - theta * theta * mean_z2);
    return F;
  };
  p.field.jacobian = [mean_z2](const Vector& v) -> Matrix {
    const double theta = v[0], phi = v[1];
    Matrix J(2, 2);
    J << -2.0 * phi * mean_z2, -2.0 * theta * mean_z2, 2.0 * theta * mean_z2, 0.0;
    return J;
  };
  p.constraints = ConstraintSpec::ball(Vector::Zero(2), 2.0);
  p.lmo = ball_lmo(Vector::Zero(2), 2.0);
  p.interior_point = Vector::Zero(2);
  p.default_metric = "gap";
  return p;
}

ProblemInstance make_toy_gan(int num_samples, std::uint64_t seed) {
  if (num_samples <= 0) throw Error(ErrorKind::InvalidArgument, "toy-gan needs samples");
  Rng rng(seed);
  double sx = 0.0, sz = 0.0;
  for (int i = 0; i < num_samples; ++i) {
    const double x = std::sqrt(2.0) * rng.gaussian();
    sx += x * x;
  }
  for (int i = 0; i < num_samples; ++i) {
    const double z = rng.gaussian();
    sz += z * z;
  }
  return make_toy_gan_from_moments(sx / num_samples, sz / num_samples);
}

ProblemInstance make_hbg(double eta, Index n, std::uint64_t seed) {
  check_eta(eta);
  if (n < 2 || n % 2 != 0) throw Error(ErrorKind::InvalidArgument, "hbg needs an even n >= 2");
  const Index h = n / 2;
  Matrix A = Matrix::Zero(n, n);
  A.topLeftCorner(h, h).diagonal().setConstant(2.0 * eta);
  A.bottomRightCorner(h, h).diagonal().setConstant(2.0 * eta);
  A.topRightCorner(h, h).diagonal().setConstant(1.0 - eta);
  A.bottomLeftCorner(h, h).diagonal().setConstant(-(1.0 - eta));
  ProblemInstance p;
  p.name = "hbg";
  p.field = VectorField::from_affine(std::move(A), Vector::Zero(n));
  p.field.lipschitz_hint = std::hypot(2.0 * eta, 1.0 - eta);
  p.constraints = ConstraintSpec::simplex({h, h});
  Rng rng(seed);
  p.interior_point = Vector(n);
  p.interior_point.head(h) = positive_block(rng, h, 1.0);
  p.interior_point.tail(h) = positive_block(rng, h, 1.0);
  p.known_solution = Vector::Constant(n, 2.0 / static_cast<double>(n));
  p.lmo = simplex_lmo({h, h});
  p.default_metric = "relative_error";
  return p;
}

GhbgMatrices make_ghbg_matrices(Index n, Rng& rng) {
  GhbgMatrices m;
  const Matrix MA = rng.gaussian_matrix(n, n);
  m.A = MA.transpose() * MA;
  m.A /= largest_eigenvalue(m.A);
  m.B = rng.gaussian_matrix(n, n);
  m.B /= std::sqrt(largest_eigenvalue(m.B.transpose() * m.B));
  const Matrix MC = rng.gaussian_matrix(n, n);
  m.C = MC.transpose() * MC;
  m.C /= largest_eigenvalue(m.C);
  return m;
}

ProblemInstance make_ghbg(double eta, std::uint64_t seed, Index n) {
  check_eta(eta);
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "ghbg needs n >= 2 per player");
  Rng rng(seed);
  const GhbgMatrices m = make_ghbg_matrices(n, rng);
  ProblemInstance p;
  p.name = "ghbg";
  p.field = VectorField::from_affine(ghbg_operator(eta, m), Vector::Zero(2 * n));
  p.constraints = ConstraintSpec::shifted_simplex({n, n});
  p.interior_point = Vector(2 * n);
  p.interior_point.head(n) = positive_block(rng, n, static_cast<double>(n)).array() - 1.0;
  p.interior_point.tail(n) = positive_block(rng, n, static_cast<double>(n)).array() - 1.0;
  p.known_solution = Vector::Zero(2 * n);
  p.lmo = shifted_simplex_lmo({n, n});
  return p;
}

ProblemInstance make_gghbg(double eta, std::uint64_t seed, Index n, Index rows) {
  check_eta(eta);
  if (n < 2 || rows < 1 || rows >= n)
    throw Error(ErrorKind::InvalidArgument, "gghbg needs 1 <= rows < n per player");
  Rng rng(seed);
  const GhbgMatrices m = make_ghbg_matrices(n, rng);
  ProblemInstance p;
  p.name = "gghbg";
  p.field = VectorField::from_affine(ghbg_operator(eta, m), Vector::Zero(2 * n));
  p.constraints = ConstraintSpec::box(Vector::Constant(2 * n, -100.0), Vector::Constant(2 * n, 100.0));
  Matrix C = Matrix::Zero(2 * rows, 2 * n);
  C.topLeftCorner(rows, n) = rng.gaussian_matrix(rows, n);
  C.bottomRightCorner(rows, n) = rng.gaussian_matrix(rows, n);
  p.constraints.C = C;
  p.constraints.d = Vector::Zero(2 * rows);
  const auto proj = build_equality_projector(C, p.constraints.d, false);
  Vector x = proj.apply(rng.gaussian_vector(2 * n));
  p.interior_point = x * (50.0 / x.lpNorm<Eigen::Infinity>());
  p.known_solution = Vector::Zero(2 * n);
  return p;
}

Vector sample_feasible(const ProblemInstance& problem, Rng& rng, double scale) {
  const ConstraintSpec& cs = problem.constraints;
  const Index n = problem.dim();
  Vector step = scale * rng.gaussian_vector(n);
  if (cs.num_equalities() > 0) step = build_equality_projector(cs.C, cs.d, false).apply(step);
  Vector x = problem.interior_point + step;
  for (int halvings = 0; halvings < 200 && !cs.strictly_feasible(x); ++halvings) {
    step *= 0.5;
    x = problem.interior_point + step;
  }
  return x;
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"cbg",  "rg",   "forsaken", "toy-gan",
                                              "hbg",  "ghbg", "gghbg"};
  return names;
}

namespace {

struct ParamReader {
  const std::string& problem;
  const std::map<std::string, std::string>& params;
  std::vector<std::string> allowed;

  void check() const {
    for (const auto& [key, value] : params)
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw Error(ErrorKind::InvalidArgument,
                    "unknown parameter '" + key + "' for problem " + problem);
  }
  double number(const std::string& key, double fallback) const {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "parameter " + key + " is not a number");
    }
  }
  Index integer(const std::string& key, Index fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    if (v != std::floor(v)) throw Error(ErrorKind::InvalidArgument, key + " must be an integer");
    return static_cast<Index>(v);
  }
};

}  // namespace

ProblemInstance make_problem(const std::string& name,
                             const std::map<std::string, std::string>& params, std::uint64_t seed) {
  ParamReader reader{name, params, {}};
  if (name == "cbg" || name == "rg") {
    reader.check();
    return name == "cbg" ? make_cbg() : make_ratio_game();
  }
  if (name == "forsaken") {
    reader.allowed = {"constraint"};
    reader.check();
    const auto it = params.find("constraint");
    const std::string kind = it == params.end() ? "ball4" : it->second;
    if (kind == "ball4") return make_forsaken(ForsakenConstraint::Ball4);
    if (kind == "x1_min") return make_forsaken(ForsakenConstraint::X1Min);
    if (kind == "x2_min") return make_forsaken(ForsakenConstraint::X2Min);
    throw Error(ErrorKind::InvalidArgument, "unknown forsaken constraint: " + kind);
  }
  if (name == "toy-gan") {
    reader.allowed = {"samples"};
    reader.check();
    return make_toy_gan(static_cast<int>(reader.integer("samples", 1000)), seed);
  }
  if (name == "hbg") {
    reader.allowed = {"eta", "n"};
    reader.check();
    return make_hbg(reader.number("eta", 0.5), reader.integer("n", 1000), seed);
  }
  if (name == "ghbg") {
    reader.allowed = {"eta", "n"};
    reader.check();
    return make_ghbg(reader.number("eta", 0.5), seed, reader.integer("n", 500));
  }
  if (name == "gghbg") {
    reader.allowed = {"eta", "n", "rows"};
    reader.check();
    return make_gghbg(reader.number("eta", 0.5), seed, reader.integer("n", 500),
                      reader.integer("rows", 10));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown problem: " + name);
}

}  // namespace cvi
