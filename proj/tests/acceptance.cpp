// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cvi/acvi.hpp"
#include "cvi/baselines.hpp"
#include "cvi/harness/csv.hpp"
#include "cvi/harness/experiment.hpp"
#include "cvi/harness/spec_file.hpp"
#include "cvi/metrics.hpp"
#include "cvi/problems.hpp"
#include "cvi/vacvi.hpp"
#include "testing.hpp"

using namespace cvi;
using cvi::testing::Gen;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failed conditions; the first few end up in the detail line.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome done(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " violation(s): " + notes_ + " | " + summary};
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double inf_norm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }
double inf_norm(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

AcviConfig cbg_reference() {
  AcviConfig c;
  c.beta = 0.08;
  c.mu_init = 1e-5;
  c.delta = 0.5;
  c.inner_schedule.assign(19, 1);
  c.inner_schedule.push_back(31);
  return c;
}

AcviConfig hbg_reference() {
  AcviConfig c;
  c.beta = 0.5;
  c.mu_init = 1e-6;
  c.delta = 0.5;
  c.inner_schedule = {50};
  return c;
}

double mu_of(const AcviConfig& c, int t) {
  if (c.mu_fixed) return *c.mu_fixed;
  return std::max(c.mu_init * std::pow(c.delta, t + 1), kMuFloor);
}

double consensus(const TraceRecord& r) { return (r.x - *r.y).norm(); }

// ---------------------------------------------------------------------------

Outcome projector_correctness() {
  Checker check;
  Gen gen(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen.integer(1, 200);
    const int p = gen.integer(0, std::min(20, n));
    const Matrix C = gen.matrix(p, n);
    const Vector d = gen.vector(p);
    const auto proj = build_equality_projector(C, d);
    const Matrix P = proj.P_c();
    std::vector<double> errs = {inf_norm(Matrix(P - P.transpose())), inf_norm(Matrix(P * P - P))};
    if (p > 0) {
      errs.push_back(inf_norm(Matrix(C * P)));
      errs.push_back(inf_norm(Vector(C * proj.d_c() - d)));
      errs.push_back(inf_norm(Vector(C * affine_project(proj, gen.vector(n, 3.0)) - d)));
    }
    for (double e : errs) {
      worst = std::max(worst, e);
      check.expect(e <= 1e-10, "case " + std::to_string(trial) + " error " + sci(e));
    }
  }
  return check.done("worst error " + sci(worst));
}

Outcome subproblem_exactness() {
  Checker check;
  struct Case {
    ProblemInstance problem;
    AcviConfig config;
  };
  AcviConfig rg;
  rg.inner_schedule = {10, 10, 10};
  AcviConfig ghbg;
  ghbg.inner_schedule = {100};
  const std::vector<Case> cases = {{make_cbg(), cbg_reference()},
                                   {make_ratio_game(), rg},
                                   {make_hbg(0.5, 1000), hbg_reference()},
                                   {make_ghbg(0.5, 0, 20), ghbg}};
  double worst_g = 0.0, worst_eq = 0.0, worst_y = 0.0;
  long checked = 0;
  for (const auto& [p, c] : cases) {
    SolverTrace trace;
    try {
      trace = acvi_run(p, c);
    } catch (const Error& e) {
      check.expect(false, p.name + " run failed: " + e.what());
      continue;
    }
    const auto proj = build_equality_projector(p.constraints.C, p.constraints.d);
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
      const auto& prev = trace.records[i - 1];
      const auto& rec = trace.records[i];
      const double g = inf_norm(x_subproblem_residual(p.field, proj, rec.x, *prev.y, *prev.lambda, c.beta));
      const double eq = p.constraints.num_equalities() > 0
                            ? inf_norm(Vector(p.constraints.C * rec.x - p.constraints.d))
                            : 0.0;
      const double gy = inf_norm(
          y_objective_gradient(p.constraints, *rec.y, rec.x, *prev.lambda, c.beta, mu_of(c, rec.t)));
      worst_g = std::max(worst_g, g);
      worst_eq = std::max(worst_eq, eq);
      worst_y = std::max(worst_y, gy);
      const std::string at = p.name + " record " + std::to_string(i);
      check.expect(g <= 1e-9, at + " |G(x)| " + sci(g));
      check.expect(eq <= 1e-8, at + " |Cx-d| " + sci(eq));
      check.expect(p.constraints.strictly_feasible(*rec.y), at + " y not strictly feasible");
      check.expect(gy <= 1e-9, at + " y gradient " + sci(gy));
      ++checked;
    }
  }
  return check.done(std::to_string(checked) + " updates; max |G| " + sci(worst_g) + ", |Cx-d| " +
                    sci(worst_eq) + ", y gradient " + sci(worst_y));
}

Outcome mode_equivalence() {
  Checker check;
  Gen gen(77);
  Rng rng(78);
  double worst = 0.0;
  for (const auto& p : {make_cbg(), make_hbg(0.5, 1000), make_ghbg(0.5, 0, 20)}) {
    const auto proj = build_equality_projector(p.constraints.C, p.constraints.d);
    for (int s = 0; s < 20; ++s) {
      const Vector y = sample_feasible(p, rng);
      const Vector lambda = gen.vector(p.dim(), 0.5);
      const double beta = gen.uniform(0.05, 1.0);
      XSolveOptions affine, newton;
      affine.mode = XSolver::AffineClosedForm;
      newton.mode = XSolver::Newton;
      newton.tol = 1e-12;
      newton.warm = y;
      try {
        const Vector a = solve_x_subproblem(p.field, proj, y, lambda, beta, affine);
        const Vector b = solve_x_subproblem(p.field, proj, y, lambda, beta, newton);
        const double dev = inf_norm(Vector(a - b));
        worst = std::max(worst, dev);
        check.expect(dev <= 1e-8, p.name + " state " + std::to_string(s) + " deviation " + sci(dev));
      } catch (const Error& e) {
        check.expect(false, p.name + " state " + std::to_string(s) + ": " + e.what());
      }
    }
  }
  return check.done("60 states, max deviation " + sci(worst));
}

Outcome lemma_monotonicity() {
  Checker check;
  AcviConfig cbg = cbg_reference();
  cbg.inner_schedule = {200};
  AcviConfig hbg = hbg_reference();
  hbg.inner_schedule = {200};
  double worst_rise = -std::numeric_limits<double>::infinity();
  for (const auto& [p, c] : {std::pair{make_cbg(), cbg}, std::pair{make_hbg(0.5, 1000), hbg}}) {
    const auto trace = acvi_run(p, c);
    check.expect(trace.records.size() == 201, p.name + " record count " + std::to_string(trace.records.size()));
    for (std::size_t i = 2; i < trace.records.size(); ++i) {
      const double rise = trace.records[i].metrics.at(metric::kLemmaResidual) -
                          trace.records[i - 1].metrics.at(metric::kLemmaResidual);
      worst_rise = std::max(worst_rise, rise);
      check.expect(rise <= 1e-12, p.name + " rises by " + sci(rise) + " at " + std::to_string(i));
    }
  }
  return check.done("largest step change " + sci(worst_rise));
}

Outcome consensus_decay() {
  AcviConfig c = cbg_reference();
  c.inner_schedule = {200};
  const auto trace = acvi_run(make_cbg(), c);
  const double r = consensus(trace.last());
  Checker check;
  check.expect(r <= 1e-6, "|x_K - y_K| = " + sci(r) + " > 1e-6");
  return check.done("K = 200, |x_K - y_K| = " + sci(r));
}

Outcome cbg_reproduction() {
  Checker check;
  const auto p = make_cbg();
  const auto acvi = acvi_run(p, cbg_reference());
  const double acvi_first = acvi.records.at(1).metrics.at(metric::kDistToSolution);
  auto eg = BaselineMethod::parse("eg");
  eg.gamma = 0.1;
  const auto eg_trace = run_baseline(p, eg, 50);
  const double eg_final = eg_trace.last().metrics.at(metric::kDistToSolution);
  int run = 0, longest = 0;
  for (const auto& r : eg_trace.records) {
    run = r.x[0] == 0.0 ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  check.expect(acvi_first < eg_final, "ACVI " + sci(acvi_first) + " not below EG " + sci(eg_final));
  check.expect(longest >= 10, "only " + std::to_string(longest) + " clamped EG iterates");
  return check.done("ACVI after one update " + sci(acvi_first) + ", EG after 50 steps " +
                    sci(eg_final) + ", EG clamped run " + std::to_string(longest));
}

Outcome hbg_reproduction() {
  using namespace cvi::harness;
  Checker check;
  const auto acvi_spec = parse_spec(
      "problem.name = hbg\nproblem.n = 1000\nmethod.beta = 0.5\nmethod.mu_init = 1e-6\n"
      "method.delta = 0.5\nmethod.schedule = 1x*\nbudget.max_iters = 50\nstop.threshold = 0.02\n"
      "sweep.axis = eta\nsweep.values = 0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9\nsweep.methods = acvi\n");
  const auto base_spec = parse_spec(
      "problem.name = hbg\nproblem.n = 1000\nmethod.gamma = 0.1\nbudget.max_iters = 50\n"
      "stop.threshold = 0.02\nsweep.axis = eta\nsweep.values = 0.1\n"
      "sweep.methods = gda,eg,ogda,la4-gda\n");
  for (const auto* spec : {&acvi_spec, &base_spec}) {
    const auto issues = validate_spec(*spec);
    if (!issues.empty()) return {false, "invalid sweep spec: " + issues.front()};
  }
  // Frozen reference counts; a regression shows up as a different count.
  const std::vector<long> frozen = {3, 3, 3, 3, 2, 2, 2, 2, 2};
  std::string hits;
  const auto acvi = run_sweep(acvi_spec, harness::sweep_threads());
  for (std::size_t i = 0; i < acvi.size(); ++i) {
    const auto& row = acvi[i];
    hits += (hits.empty() ? "" : ",") + (row.capped ? std::string("cap") : std::to_string(*row.iters_to_threshold));
    check.expect(!row.capped, "ACVI capped at eta " + format_double(row.axis_value));
    check.expect(row.iters_to_threshold == frozen[i],
                 "ACVI count changed at eta " + format_double(row.axis_value));
  }
  std::string finals;
  for (const auto& row : run_sweep(base_spec, harness::sweep_threads())) {
    finals += " " + row.method + "=" + sci(row.final_metric);
    check.expect(row.capped, row.method + " reached 0.02 at eta 0.1");
  }
  return check.done("ACVI iterations " + hits + "; baselines at eta 0.1 after 50:" + finals);
}

Outcome ghbg_reproduction() {
  Checker check;
  const auto p = make_ghbg(0.5, 0, 20);
  AcviConfig c;
  c.inner_schedule = {200};
  const auto acvi = acvi_run(p, c);
  long acvi_hit = -1;
  for (const auto& r : acvi.records)
    if (r.x.norm() <= 1e-2) {
      acvi_hit = r.iter;
      break;
    }
  check.expect(acvi_hit >= 0 && acvi_hit <= 34, "ACVI hit " + std::to_string(acvi_hit));

  FwOptions fw;
  fw.max_iters = 30000;
  fw.eps = 1e-2;
  const auto fw_trace = fw_run(p, fw);
  const long fw_hit = fw_trace.last().metrics.at(metric::kGap) <= 1e-2 ? fw_trace.last().iter : -1;
  check.expect(fw_hit >= 0 && fw_hit <= 22698, "FW hit " + std::to_string(fw_hit));
  // Trend: maxima of g_t over dyadic blocks [2^j, 2^{j+1}) never increase.
  double prev_block = std::numeric_limits<double>::infinity();
  int blocks = 0;
  for (std::size_t lo = 1; lo < fw_trace.records.size(); lo *= 2) {
    double block = 0.0;
    for (std::size_t t = lo; t < std::min(2 * lo, fw_trace.records.size()); ++t)
      block = std::max(block, fw_trace.records[t].metrics.at(metric::kGap));
    check.expect(block <= prev_block, "FW block maximum rises at t = " + std::to_string(lo));
    prev_block = block;
    ++blocks;
  }
  return check.done("ACVI |x| <= 1e-2 at " + std::to_string(acvi_hit) + " (frozen 34), FW gap <= 1e-2 at " +
                    std::to_string(fw_hit) + " (frozen 22698), " + std::to_string(blocks) +
                    " non-increasing dyadic blocks");
}

Outcome projection_oracles() {
  Checker check;
  Gen gen(404);
  double worst = 0.0;
  const auto record = [&](const Vector& a, const Vector& b, const std::string& what) {
    const double dev = inf_norm(Vector(a - b));
    worst = std::max(worst, dev);
    check.expect(dev <= 1e-8, what + " deviation " + sci(dev));
  };
  for (int s = 0; s < 200; ++s) {
    const int n = gen.integer(1, 6);
    const Vector v = gen.vector(n, 2.0);
    const Matrix lower = -Matrix::Identity(n, n);
    record(project(ProjectionOracle::simplex({n}), v),
           cvi::testing::brute_force_qp(v, lower, Vector::Zero(n), Matrix::Ones(1, n), Vector::Ones(1)),
           "simplex");
    record(project(ProjectionOracle::shifted_simplex({n}), v),
           cvi::testing::brute_force_qp(v, lower, Vector::Ones(n), Matrix::Ones(1, n), Vector::Zero(1)),
           "shifted simplex");
    const Vector lo = gen.uniform_vector(n, -1.5, 0.0), hi = gen.uniform_vector(n, 0.1, 1.5);
    Matrix A(2 * n, n);
    A << Matrix::Identity(n, n), -Matrix::Identity(n, n);
    Vector b(2 * n);
    b << hi, -lo;
    record(project(ProjectionOracle::box(lo, hi), v),
           cvi::testing::brute_force_qp(v, A, b, Matrix(0, n), Vector(0)), "box");
    const Vector center = gen.vector(n);
    const double radius = gen.uniform(0.1, 2.0);
    record(project(ProjectionOracle::ball(center, radius), v),
           cvi::testing::ball_projection_bisection(v, center, radius), "ball");
  }
  double worst_violation = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Matrix A = gen.matrix(10, 20);
    const Vector b = A * gen.vector(20) + gen.uniform_vector(10, 0.0, 1.0);
    try {
      const Vector x = project(ProjectionOracle::greedy_linear(A, b, 1e-8), gen.vector(20, 5.0));
      const double viol = max_normalized_violation(A, b, x);
      worst_violation = std::max(worst_violation, viol);
      check.expect(viol < 1e-8, "greedy violation " + sci(viol));
    } catch (const Error& e) {
      check.expect(false, std::string("greedy: ") + e.what());
    }
  }
  return check.done("800 exact projections, max deviation " + sci(worst) +
                    "; 100 greedy runs, max violation " + sci(worst_violation));
}

Outcome vacvi_cross_check() {
  Checker check;
  const auto p = make_cbg();
  const auto acvi = acvi_run(p, cbg_reference());
  const auto vacvi = vacvi_run(p, cbg_reference());
  const double da = acvi.last().metrics.at(metric::kDistToSolution);
  const double dv = vacvi.last().metrics.at(metric::kDistToSolution);
  check.expect(dv <= 2.0 * da, "v-ACVI " + sci(dv) + " vs ACVI " + sci(da));
  double worst_eq = 0.0;
  // cBG has no equalities, so the equality check also runs on HBG. Each
  // barrier Newton step is a dense solve, hence the smaller instance.
  AcviConfig hbg = hbg_reference();
  hbg.inner_schedule = {30};
  const auto hbg_problem = make_hbg(0.5, 100);
  for (const auto& [problem, trace] :
       {std::pair{p, vacvi}, std::pair{hbg_problem, vacvi_run(hbg_problem, hbg)}}) {
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
      const auto& r = trace.records[i];
      check.expect(problem.constraints.strictly_feasible(r.x),
                   problem.name + " x not strictly feasible at " + std::to_string(i));
      const double eq = problem.constraints.equality_residual(*r.y);
      worst_eq = std::max(worst_eq, eq);
      check.expect(eq <= 1e-10, problem.name + " |Cy-d| " + sci(eq));
    }
  }
  return check.done("final distance v-ACVI " + sci(dv) + ", ACVI " + sci(da) + "; max |Cy-d| " +
                    sci(worst_eq));
}

Outcome derivative_checks() {
  Checker check;
  double worst_f = 0.0, worst_y = 0.0;
  Gen gen(91);
  for (const auto& name : problem_names()) {
    std::map<std::string, std::string> params;
    if (name == "hbg") params["n"] = "40";
    if (name == "ghbg" || name == "gghbg") params["n"] = "10";
    if (name == "gghbg") params["rows"] = "3";
    const auto p = make_problem(name, params, 3);
    Rng rng(92);
    for (int s = 0; s < 20; ++s) {
      const Vector x = sample_feasible(p, rng, 0.5);
      const double dev =
          cvi::testing::relative_deviation(p.field.jacobian(x), cvi::testing::fd_jacobian(p.field.eval, x));
      worst_f = std::max(worst_f, dev);
      check.expect(dev <= 1e-5, name + " Jacobian deviation " + sci(dev));

      // y-subproblem objective, written out independently of the library.
      const Vector x_next = gen.vector(p.dim()), lambda = gen.vector(p.dim(), 0.5);
      const double beta = gen.uniform(0.05, 1.0), mu = gen.uniform(1e-4, 1e-1);
      const auto objective = [&](const Vector& y) {
        double barrier = 0.0;
        for (const auto& phi : p.constraints.inequalities) barrier -= std::log(-phi.value(y));
        return mu * barrier + 0.5 * beta * (y - x_next - lambda / beta).squaredNorm();
      };
      const Vector grad = y_objective_gradient(p.constraints, x, x_next, lambda, beta, mu);
      const double dy = cvi::testing::relative_deviation(grad, cvi::testing::fd_gradient(objective, x));
      worst_y = std::max(worst_y, dy);
      check.expect(dy <= 1e-5, name + " barrier gradient deviation " + sci(dy));
    }
  }
  return check.done("7 problems x 20 points, max relative deviation: Jacobian " + sci(worst_f) +
                    ", barrier gradient " + sci(worst_y));
}

Outcome gap_sanity() {
  Checker check;
  const auto hbg = make_hbg(0.5, 1000);
  const auto rg = make_ratio_game();
  const double g_hbg = gap(hbg, *hbg.known_solution), g_rg = gap(rg, *rg.known_solution);
  check.expect(std::abs(g_hbg) <= 1e-9, "HBG gap at solution " + sci(g_hbg));
  check.expect(std::abs(g_rg) <= 1e-9, "RG gap at solution " + sci(g_rg));
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto* p : {&hbg, &rg}) {
    Rng rng(93);
    for (int i = 0; i < 100; ++i) {
      const double g = gap(*p, sample_feasible(*p, rng, 0.7));
      lowest = std::min(lowest, g);
      check.expect(g >= -1e-12, p->name + " negative gap " + sci(g));
    }
  }
  // Exhaustive grid over both 2-simplices; the LMO's vertices lie on the grid.
  Gen gen(94);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const double a = gen.uniform(0.0, 1.0), b = gen.uniform(0.0, 1.0);
    const Vector x{{a, 1.0 - a, b, 1.0 - b}};
    const Vector F = rg.field(x);
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100; ++i)
      for (int j = 0; j <= 100; ++j) {
        const double u = i / 100.0, v = j / 100.0;
        best = std::max(best, F.dot(x - Vector{{u, 1.0 - u, v, 1.0 - v}}));
      }
    const double dev = std::abs(gap(rg, x) - best);
    worst = std::max(worst, dev);
    check.expect(dev <= 1e-12, "RG grid deviation " + sci(dev));
  }
  return check.done("gap(x*) HBG " + sci(g_hbg) + ", RG " + sci(g_rg) + "; min sampled gap " +
                    sci(lowest) + "; grid deviation " + sci(worst));
}

Outcome forsaken_contrast() {
  Checker check;
  const auto p = make_forsaken();
  auto eg = BaselineMethod::parse("eg");
  eg.gamma = 0.1;
  const auto trace = run_baseline(p, eg, 500);
  const Vector& last = trace.last().x;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = trace.records.size() - 101; i < trace.records.size() - 1; ++i) {
    const double d = (trace.records[i].x - last).norm();
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  check.expect(hi - lo > 0.05, "EG amplitude " + sci(hi - lo));
  const auto acvi = acvi_run(p, cbg_reference());
  const double r = consensus(acvi.last());
  check.expect(r < 1e-4, "ACVI consensus " + sci(r));
  return check.done("EG amplitude " + sci(hi - lo) + ", ACVI |x_K - y_K| " + sci(r));
}

Outcome harness_determinism() {
  using namespace cvi::harness;
  const auto spec = parse_spec(
      "problem.name = ghbg\nproblem.n = 20\nbudget.max_iters = 60\nstop.metric = gap\n"
      "stop.threshold = 1e-3\nsweep.axis = eta\nsweep.values = 0.2,0.5,0.8\n"
      "sweep.methods = acvi,acvi-inexact,eg,la3-ogda,fw\n");
  if (const auto issues = validate_spec(spec); !issues.empty()) return {false, issues.front()};
  std::vector<std::string> serial, parallel;
  run_sweep(spec, 1, &serial);
  run_sweep(spec, 8, &parallel);
  const auto strip = [](const std::string& csv) {
    const auto table = parse_csv(csv);
    const int wall = table.column("wall_time_s");
    std::string out;
    for (const auto& row : table.rows)
      for (std::size_t c = 0; c < row.size(); ++c)
        if (static_cast<int>(c) != wall) out += row[c] + ",";
    return out;
  };
  Checker check;
  check.expect(serial.size() == parallel.size(), "run count differs");
  for (std::size_t i = 0; i < std::min(serial.size(), parallel.size()); ++i)
    check.expect(strip(serial[i]) == strip(parallel[i]), "run " + std::to_string(i) + " differs");
  return check.done(std::to_string(serial.size()) + " runs identical serial vs 8 threads");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const double none = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria = {
      {1, "projector correctness", 5.0, projector_correctness},
      {2, "subproblem exactness", 30.0, subproblem_exactness},
      {3, "affine vs Newton x-solves", none, mode_equivalence},
      {4, "lemma residual monotonicity", none, lemma_monotonicity},
      {5, "consensus residual decay", none, consensus_decay},
      {6, "cBG: ACVI vs projected EG", 1.0, cbg_reproduction},
      {7, "HBG rotation sweep", 120.0, hbg_reproduction},
      {8, "g-HBG: ACVI and Frank-Wolfe", 60.0, ghbg_reproduction},
      {9, "projection oracles", none, projection_oracles},
      {10, "v-ACVI cross-check", none, vacvi_cross_check},
      {11, "Jacobian and barrier gradient checks", none, derivative_checks},
      {12, "gap function sanity", none, gap_sanity},
      {13, "forsaken limit cycle contrast", none, forsaken_contrast},
      {14, "harness determinism", none, harness_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      out.pass = false;
      out.detail += " | runtime " + std::to_string(secs) + " s over budget";
    }
    if (!out.pass) ++failed;
    std::printf("%s %2d %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
