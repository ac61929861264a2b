#include "cvi/baselines.hpp"

#include <cmath>
#include <regex>

#include "cvi/metrics.hpp"

namespace cvi {

ProjectionOracle ProjectionOracle::identity() { return {}; }

ProjectionOracle ProjectionOracle::orthant() {
  ProjectionOracle o;
  o.kind = Kind::ExactOrthant;
  return o;
}

ProjectionOracle ProjectionOracle::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size())
    throw Error(ErrorKind::InvalidArgument, "box bounds differ in length");
  ProjectionOracle o;
  o.kind = Kind::ExactBox;
  o.lower = std::move(lower);
  o.upper = std::move(upper);
  return o;
}

ProjectionOracle ProjectionOracle::ball(Vector center, double radius) {
  ProjectionOracle o;
  o.kind = Kind::ExactBall;
  o.center = std::move(center);
  o.radius = radius;
  return o;
}

ProjectionOracle ProjectionOracle::simplex(std::vector<Index> blocks) {
  ProjectionOracle o;
  o.kind = Kind::ExactSimplex;
  o.blocks = std::move(blocks);
  return o;
}

ProjectionOracle ProjectionOracle::shifted_simplex(std::vector<Index> blocks) {
  ProjectionOracle o;
  o.kind = Kind::ExactShiftedSimplex;
  o.blocks = std::move(blocks);
  return o;
}

ProjectionOracle ProjectionOracle::greedy_linear(Matrix A, Vector b, double eps) {
  if (A.rows() != b.size())
    throw Error(ErrorKind::InvalidArgument, "greedy projection: A and b disagree");
  ProjectionOracle o;
  o.kind = Kind::GreedyLinear;
  o.A = std::move(A);
  o.b = std::move(b);
  o.eps = eps;
  return o;
}

ProjectionOracle ProjectionOracle::composite(const Matrix& C, const Vector& d, Matrix A, Vector b,
                                             double eps) {
  ProjectionOracle o = greedy_linear(std::move(A), std::move(b), eps);
  o.kind = Kind::Composite;
  o.equalities = build_equality_projector(C, d);
  return o;
}

ProjectionOracle ProjectionOracle::for_constraints(const ConstraintSpec& cs, double eps) {
  if (const auto* s = std::get_if<tags::Simplex>(&cs.tag)) return simplex(s->blocks);
  if (const auto* s = std::get_if<tags::ShiftedSimplex>(&cs.tag)) return shifted_simplex(s->blocks);
  if (cs.num_equalities() > 0) {
    if (cs.num_inequalities() == 0)
      return composite(cs.C, cs.d, Matrix::Zero(0, cs.dim()), Vector::Zero(0), eps);
    if (!cs.linear)
      throw Error(ErrorKind::InvalidArgument, "no projection for nonlinear sets with equalities");
    return composite(cs.C, cs.d, cs.linear->A, cs.linear->b, eps);
  }
  if (std::holds_alternative<tags::Orthant>(cs.tag)) return orthant();
  if (const auto* box_tag = std::get_if<tags::Box>(&cs.tag)) return box(box_tag->lower, box_tag->upper);
  if (const auto* ball_tag = std::get_if<tags::EuclideanBall>(&cs.tag))
    return ball(ball_tag->center, ball_tag->radius);
  if (cs.num_inequalities() == 0) return identity();
  if (!cs.linear) throw Error(ErrorKind::InvalidArgument, "no projection for this nonlinear set");
  return greedy_linear(cs.linear->A, cs.linear->b, eps);
}

double max_normalized_violation(const Matrix& A, const Vector& b, const Vector& x) {
  double worst = 0.0;
  for (Index j = 0; j < A.rows(); ++j)
    worst = std::max(worst, (A.row(j).dot(x) - b[j]) / A.row(j).norm());
  return worst;
}

namespace {

Vector project_blocks(const Vector& v, const std::vector<Index>& blocks, double shift) {
  Vector out(v.size());
  Index offset = 0;
  for (Index len : blocks) {
    // With z = x + 1 the shifted block {x ≥ −1, Σx = 0} becomes {z ≥ 0, Σz = len}.
    const double total = shift == 0.0 ? 1.0 : shift * static_cast<double>(len);
    out.segment(offset, len) =
        project_simplex((v.segment(offset, len).array() + shift).matrix(), total).array() - shift;
    offset += len;
  }
  if (offset != v.size()) throw Error(ErrorKind::InvalidArgument, "block sizes do not sum to n");
  return out;
}

Vector greedy(const ProjectionOracle& o, Vector theta) {
  const Index m = o.A.rows();
  if (m == 0) return theta;
  const Vector norms = o.A.rowwise().norm();
  const double v0 = max_normalized_violation(o.A, o.b, theta);
  if (v0 < o.eps) return theta;
  const long cap = o.max_iters.value_or(
      10 * static_cast<long>(m) * std::max(1L, static_cast<long>(std::ceil(std::log(v0 / o.eps)))));
  for (long it = 0;; ++it) {
    Index worst = 0;
    double worst_violation = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) {
      const double viol = (o.A.row(j).dot(theta) - o.b[j]) / norms[j];
      if (viol > worst_violation) {
        worst_violation = viol;
        worst = j;
      }
    }
    if (worst_violation < o.eps) return theta;
    if (it >= cap)
      throw Error(ErrorKind::NonTerminating,
                  "greedy projection exceeded " + std::to_string(cap) + " iterations");
    const Vector a = o.A.row(worst).transpose();
    const double excess = a.dot(theta) - o.b[worst];
    if (o.equalities) {
      const Vector dir = o.equalities->apply(a);
      const double denom = a.dot(dir);
      if (!(denom > 0.0))
        throw Error(ErrorKind::InvalidArgument, "inequality row lies in the span of C");
      theta -= (excess / denom) * dir;
    } else {
      theta -= (excess / (norms[worst] * norms[worst])) * a;
    }
  }
}

bool inside(const ConstraintSpec& cs, const Vector& x, double tol) {
  const Vector phi = cs.values(x);
  return (phi.size() == 0 || phi.maxCoeff() <= tol) && cs.equality_residual(x) <= tol;
}

}  // namespace

Vector project(const ProjectionOracle& o, const Vector& v) {
  using Kind = ProjectionOracle::Kind;
  switch (o.kind) {
    case Kind::Identity: return v;
    case Kind::ExactOrthant: return project_orthant(v);
    case Kind::ExactBox: return project_box(v, o.lower, o.upper);
    case Kind::ExactBall: return project_ball(v, o.center, o.radius);
    case Kind::ExactSimplex: return project_blocks(v, o.blocks, 0.0);
    case Kind::ExactShiftedSimplex: return project_blocks(v, o.blocks, 1.0);
    case Kind::GreedyLinear: return greedy(o, v);
    case Kind::Composite: return greedy(o, affine_project(*o.equalities, v));
  }
  return v;
}

Vector gda_step(const VectorField& F, const ProjectionOracle& oracle, double gamma,
                const Vector& x) {
  return project(oracle, x - gamma * F(x));
}

Vector eg_step(const VectorField& F, const ProjectionOracle& oracle, double gamma,
               const Vector& x) {
  const Vector half = project(oracle, x - gamma * F(x));
  return project(oracle, x - gamma * F(half));
}

OgdaState ogda_init(const VectorField& F, const Vector& x0) { return {x0, F(x0)}; }

OgdaState ogda_step(const VectorField& F, const ProjectionOracle& oracle, double gamma,
                    const OgdaState& state) {
  const Vector Fx = F(state.x);
  return {project(oracle, state.x - 2.0 * gamma * Fx + gamma * state.F_prev), Fx};
}

std::string BaselineMethod::name() const {
  const char* base_name = base == BaseMethod::Gda ? "gda" : base == BaseMethod::Eg ? "eg" : "ogda";
  if (la_k > 0) return "la" + std::to_string(la_k) + "-" + base_name;
  return base_name;
}

BaselineMethod BaselineMethod::parse(const std::string& name) {
  static const std::regex pattern("(?:la([0-9]+)-)?(gda|eg|ogda)");
  std::smatch match;
  if (!std::regex_match(name, match, pattern))
    throw Error(ErrorKind::InvalidArgument, "unknown baseline method: " + name);
  BaselineMethod method;
  const std::string base = match[2];
  method.base = base == "gda" ? BaseMethod::Gda : base == "eg" ? BaseMethod::Eg : BaseMethod::Ogda;
  if (match[1].matched) {
    method.la_k = std::stoi(match[1]);
    if (method.la_k < 1) throw Error(ErrorKind::InvalidArgument, "lookahead k must be >= 1");
  }
  return method;
}

SolverTrace run_baseline(const ProblemInstance& problem, const BaselineMethod& method,
                         long iterations, const RunLimits& limits, std::optional<Vector> x0,
                         std::optional<ProjectionOracle> oracle_override) {
  if (!(method.gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  if (method.la_k > 0 && !(method.la_alpha >= 0.0 && method.la_alpha <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "lookahead alpha must lie in [0, 1]");
  const ConstraintSpec& cs = problem.constraints;
  const ProjectionOracle oracle =
      oracle_override ? std::move(*oracle_override) : ProjectionOracle::for_constraints(cs);
  const double feas_tol = oracle.is_exact() ? 1e-12 : std::max(1e-12, oracle.eps);

  OgdaState state = ogda_init(problem.field, x0.value_or(problem.interior_point));
  SolverTrace trace;
  trace.method = method.name();
  trace.config_echo = "gamma=" + std::to_string(method.gamma) +
                      (method.la_k > 0 ? " la_k=" + std::to_string(method.la_k) +
                                             " la_alpha=" + std::to_string(method.la_alpha)
                                       : "");
  TraceRecorder recorder(trace, limits);
  const auto push = [&](long iter) {
    TraceRecord rec;
    rec.t = 0;
    rec.k = static_cast<int>(iter);
    rec.iter = iter;
    rec.x = state.x;
    annotate_metrics(problem, rec);
    return recorder.push(std::move(rec));
  };
  if (!push(0)) return trace;

  Vector snapshot = state.x;
  for (long step = 0; step < iterations; ++step) {
    if (!recorder.update_budget_left(step)) break;
    switch (method.base) {
      case BaseMethod::Gda:
        state.x = gda_step(problem.field, oracle, method.gamma, state.x);
        break;
      case BaseMethod::Eg:
        state.x = eg_step(problem.field, oracle, method.gamma, state.x);
        break;
      case BaseMethod::Ogda:
        state = ogda_step(problem.field, oracle, method.gamma, state);
        break;
    }
    const long done = step + 1;
    if (method.la_k == 0) {
      if (!push(done)) break;
    } else if (done % method.la_k == 0) {
      const double alpha = method.la_alpha;
      state.x = (1.0 - alpha) * snapshot + alpha * state.x;
      if (!inside(cs, state.x, feas_tol)) state.x = project(oracle, state.x);
      snapshot = state.x;
      if (!push(done)) break;
    }
  }
  return trace;
}

SolverTrace fw_run(const ProblemInstance& problem, const FwOptions& options,
                   const RunLimits& limits, std::optional<Vector> z0) {
  if (!problem.has_lmo())
    throw Error(ErrorKind::MissingLMO, "Frank-Wolfe needs an LMO for " + problem.name);
  Vector z = z0.value_or(problem.interior_point);
  SolverTrace trace;
  trace.method = "fw";
  trace.config_echo = std::string("rule=") +
                      (options.rule == FwOptions::StepRule::OpenLoop ? "open_loop" : "gap_adaptive");
  TraceRecorder recorder(trace, limits);
  for (long t = 0;; ++t) {
    const Vector r = problem.field(z);
    const Vector s = problem.lmo(r);
    const double g = (z - s).dot(r);
    TraceRecord rec;
    rec.k = static_cast<int>(t);
    rec.iter = t;
    rec.x = z;
    annotate_metrics(problem, rec);
    rec.metrics[metric::kGap] = g;
    if (!recorder.push(std::move(rec))) break;
    if (g <= options.eps || t >= options.max_iters || !recorder.update_budget_left(t)) break;
    const double gamma = options.rule == FwOptions::StepRule::OpenLoop
                             ? 2.0 / (2.0 + static_cast<double>(t))
                             : std::min(1.0, options.nu / (2.0 * options.C) * g);
    z = (1.0 - gamma) * z + gamma * s;
  }
  return trace;
}

}  // namespace cvi
