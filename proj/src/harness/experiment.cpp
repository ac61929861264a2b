#include "cvi/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <ostream>
#include <set>
#include <thread>

#include "cvi/acvi.hpp"
#include "cvi/baselines.hpp"
#include "cvi/harness/csv.hpp"
#include "cvi/harness/svg.hpp"
#include "cvi/metrics.hpp"
#include "cvi/problems.hpp"
#include "cvi/vacvi.hpp"

namespace cvi::harness {

namespace {

enum class Family { Acvi, AcviInexact, Vacvi, Baseline, Fw };

std::optional<Family> family_of(const std::string& name) {
  if (name == "acvi") return Family::Acvi;
  if (name == "acvi-inexact") return Family::AcviInexact;
  if (name == "vacvi") return Family::Vacvi;
  if (name == "fw") return Family::Fw;
  try {
    BaselineMethod::parse(name);
    return Family::Baseline;
  } catch (const Error&) {
    return std::nullopt;
  }
}

const std::vector<std::string>& allowed_params(Family family) {
  static const std::vector<std::string> acvi{"beta",     "mu_init",          "delta",
                                             "schedule", "x_solver",         "y_solver",
                                             "tol",      "newton_max_iters", "mu_fixed"};
  static const std::vector<std::string> inexact{
      "beta", "mu_init", "delta", "schedule", "tol", "mu_fixed",
      "inner_optimizer", "inner_steps", "eta_x", "eta_y"};
  static const std::vector<std::string> vacvi{"beta", "mu_init", "delta", "schedule",
                                              "tol", "newton_max_iters", "mu_fixed"};
  static const std::vector<std::string> baseline{"gamma", "alpha", "projection_eps"};
  static const std::vector<std::string> fw{"rule", "eps", "C", "nu"};
  switch (family) {
    case Family::Acvi: return acvi;
    case Family::AcviInexact: return inexact;
    case Family::Vacvi: return vacvi;
    case Family::Baseline: return baseline;
    case Family::Fw: return fw;
  }
  return acvi;
}

bool accepts(Family family, const std::string& key) {
  const auto& allowed = allowed_params(family);
  return std::find(allowed.begin(), allowed.end(), key) != allowed.end();
}

struct ParamView {
  const std::map<std::string, std::string>& params;
  Family family;

  const std::string* raw(const std::string& key) const {
    if (!accepts(family, key)) return nullptr;
    const auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  }
  double number(const std::string& key, double fallback) const {
    const auto* v = raw(key);
    return v ? parse_double(*v, "method." + key) : fallback;
  }
  long integer(const std::string& key, long fallback) const {
    const auto* v = raw(key);
    return v ? parse_long(*v, "method." + key) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    const auto* v = raw(key);
    return v ? *v : fallback;
  }
};

/// "19x1,1x*": count x inner, `*` takes the rest of the update budget.
std::vector<int> parse_schedule(const std::string& text, std::optional<long> max_iters) {
  struct Entry {
    long count;
    std::optional<long> inner;
  };
  std::vector<Entry> entries;
  long fixed = 0;
  int stars = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto x = item.find('x');
    Entry e{1, std::nullopt};
    const std::string inner = x == std::string::npos ? item : item.substr(x + 1);
    if (x != std::string::npos) e.count = parse_long(item.substr(0, x), "method.schedule");
    if (inner == "*") {
      ++stars;
    } else {
      e.inner = parse_long(inner, "method.schedule");
      if (*e.inner < 0) throw Error(ErrorKind::InvalidArgument, "method.schedule: negative count");
      fixed += e.count * *e.inner;
    }
    if (e.count < 0) throw Error(ErrorKind::InvalidArgument, "method.schedule: negative count");
    entries.push_back(e);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (stars > 1) throw Error(ErrorKind::InvalidArgument, "method.schedule: at most one '*'");
  const long rest = max_iters ? std::max(0L, *max_iters - fixed) : (1L << 30);
  std::vector<int> schedule;
  for (const auto& e : entries) {
    long inner = e.inner.value_or(e.count > 0 ? rest / e.count : 0);
    if (!e.inner && e.count > 0 && rest % e.count) ++inner;
    for (long i = 0; i < e.count; ++i)
      schedule.push_back(static_cast<int>(std::min<long>(inner, std::numeric_limits<int>::max())));
  }
  return schedule;
}

AcviConfig acvi_config(const ExperimentSpec& spec, Family family) {
  const ParamView p{spec.method_params, family};
  AcviConfig c;
  c.beta = p.number("beta", c.beta);
  c.mu_init = p.number("mu_init", c.mu_init);
  c.delta = p.number("delta", c.delta);
  c.inner_schedule = parse_schedule(p.text("schedule", "1x*"), spec.max_iters);
  c.tol_subproblem = p.number("tol", c.tol_subproblem);
  c.newton_max_iters = static_cast<int>(p.integer("newton_max_iters", c.newton_max_iters));
  if (p.raw("mu_fixed")) c.mu_fixed = p.number("mu_fixed", 0.0);
  const std::string xs = p.text("x_solver", "auto");
  if (xs == "auto") c.x_solver = XSolver::Auto;
  else if (xs == "affine") c.x_solver = XSolver::AffineClosedForm;
  else if (xs == "newton") c.x_solver = XSolver::Newton;
  else throw Error(ErrorKind::InvalidArgument, "method.x_solver: unknown value '" + xs + "'");
  const std::string ys = p.text("y_solver", "closed_form");
  if (ys == "closed_form") c.y_solver = YSolver::StructuralClosedForm;
  else if (ys == "newton") c.y_solver = YSolver::DampedNewton;
  else throw Error(ErrorKind::InvalidArgument, "method.y_solver: unknown value '" + ys + "'");
  if (family == Family::AcviInexact) {
    c.x_solver = XSolver::InnerFirstOrder;
    const std::string opt = p.text("inner_optimizer", "eg");
    if (opt == "eg") c.inner.optimizer = InnerOptimizer::Eg;
    else if (opt == "gda") c.inner.optimizer = InnerOptimizer::Gda;
    else throw Error(ErrorKind::InvalidArgument, "method.inner_optimizer: unknown value '" + opt + "'");
    c.inner.steps = static_cast<int>(p.integer("inner_steps", c.inner.steps));
    c.inner.eta_x = p.number("eta_x", c.inner.eta_x);
    c.inner.eta_y = p.number("eta_y", c.inner.eta_y);
  }
  if (auto issues = c.validate(); !issues.empty())
    throw Error(ErrorKind::InvalidArgument, "method: " + issues.front());
  return c;
}

BaselineMethod baseline_method(const std::string& name, const ExperimentSpec& spec) {
  const ParamView p{spec.method_params, Family::Baseline};
  BaselineMethod m = BaselineMethod::parse(name);
  m.gamma = p.number("gamma", m.gamma);
  m.la_alpha = p.number("alpha", m.la_alpha);
  if (!(m.gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "method.gamma must be positive");
  if (!(m.la_alpha >= 0.0 && m.la_alpha <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "method.alpha must lie in [0, 1]");
  return m;
}

FwOptions fw_options(const ExperimentSpec& spec) {
  const ParamView p{spec.method_params, Family::Fw};
  FwOptions o;
  const std::string rule = p.text("rule", "open_loop");
  if (rule == "open_loop") o.rule = FwOptions::StepRule::OpenLoop;
  else if (rule == "gap_adaptive") o.rule = FwOptions::StepRule::GapAdaptive;
  else throw Error(ErrorKind::InvalidArgument, "method.rule: unknown value '" + rule + "'");
  o.eps = p.number("eps", o.eps);
  o.C = p.number("C", o.C);
  o.nu = p.number("nu", o.nu);
  o.max_iters = spec.max_iters.value_or(std::numeric_limits<long>::max());
  if (!(o.C > 0.0) || !(o.nu > 0.0))
    throw Error(ErrorKind::InvalidArgument, "method.C and method.nu must be positive");
  return o;
}

std::string stop_metric(const ExperimentSpec& spec, const ProblemInstance& problem) {
  return spec.stop_metric.value_or(problem.default_metric);
}

RunLimits run_limits(const ExperimentSpec& spec, const ProblemInstance& problem) {
  RunLimits limits;
  limits.max_updates = spec.max_iters;
  limits.max_wall_time_s = spec.max_wall_time_s;
  if (spec.stop_threshold) {
    const std::string name = stop_metric(spec, problem);
    const double threshold = *spec.stop_threshold;
    limits.stop = [name, threshold](const TraceRecord& rec) {
      const auto it = rec.metrics.find(name);
      return it != rec.metrics.end() && it->second <= threshold;
    };
  }
  return limits;
}

std::vector<std::string> methods_of(const ExperimentSpec& spec) {
  if (!spec.sweep_methods.empty()) return spec.sweep_methods;
  return {spec.method_name};
}

void check_method_params(const ExperimentSpec& spec, const std::vector<std::string>& methods,
                         std::vector<std::string>& issues) {
  std::vector<Family> families;
  for (const auto& m : methods)
    if (auto f = family_of(m)) families.push_back(*f);
  for (const auto& [key, value] : spec.method_params) {
    const bool used = std::any_of(families.begin(), families.end(),
                                  [&](Family f) { return accepts(f, key); });
    if (!used) issues.push_back("method." + key + ": not a parameter of the selected method");
  }
}

ExperimentSpec with_method(const ExperimentSpec& spec, const std::string& method) {
  ExperimentSpec copy = spec;
  copy.method_name = method;
  copy.sweep_methods.clear();
  return copy;
}

double metric_or_nan(const TraceRecord& rec, const std::string& name) {
  const auto it = rec.metrics.find(name);
  return it == rec.metrics.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

std::string sidecar_path(const ExperimentSpec& spec, const std::string& spec_path) {
  return (spec.csv_path ? *spec.csv_path : spec_path) + ".err.txt";
}

}  // namespace

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> issues;
  const auto& problems = problem_names();
  if (std::find(problems.begin(), problems.end(), spec.problem_name) == problems.end())
    issues.push_back("problem.name: unknown problem '" + spec.problem_name + "'");
  const auto methods = methods_of(spec);
  for (const auto& m : methods)
    if (!family_of(m))
      issues.push_back((spec.sweep_methods.empty() ? "method.name" : "sweep.methods") +
                       std::string(": unknown method '") + m + "'");
  if (!spec.max_iters && !spec.max_wall_time_s)
    issues.emplace_back("budget: set budget.max_iters or budget.max_wall_time_s");
  if (spec.max_iters && *spec.max_iters < 0) issues.emplace_back("budget.max_iters must be >= 0");
  if (spec.max_wall_time_s && !(*spec.max_wall_time_s > 0.0))
    issues.emplace_back("budget.max_wall_time_s must be positive");
  if (spec.stop_metric) {
    const auto& names = metric_names();
    if (std::find(names.begin(), names.end(), *spec.stop_metric) == names.end())
      issues.push_back("stop.metric: unknown metric '" + *spec.stop_metric + "'");
  }
  if (spec.svg_x != "iter" && spec.svg_x != "wall_time")
    issues.emplace_back("output.svg_x must be iter or wall_time");
  if (spec.sweep_axis) {
    const std::string& axis = *spec.sweep_axis;
    if (axis != "eta" && axis != "time_budget" && axis != "threshold")
      issues.push_back("sweep.axis: unknown axis '" + axis + "'");
    if (spec.sweep_values.empty()) issues.emplace_back("sweep.values: empty");
  }
  if (!issues.empty()) return issues;

  check_method_params(spec, methods, issues);
  if (!issues.empty()) return issues;
  try {
    const ExperimentSpec first = with_method(spec, methods.front());
    for (const auto& m : methods) {
      const ExperimentSpec one = with_method(spec, m);
      switch (*family_of(m)) {
        case Family::Acvi: acvi_config(one, Family::Acvi); break;
        case Family::AcviInexact: acvi_config(one, Family::AcviInexact); break;
        case Family::Vacvi: acvi_config(one, Family::Vacvi); break;
        case Family::Baseline: baseline_method(m, one); break;
        case Family::Fw: fw_options(one); break;
      }
    }
    const ProblemInstance problem = build_problem(first);
    for (const auto& issue : validate_problem(problem)) issues.push_back("problem: " + issue);
    for (const auto& m : methods)
      if (*family_of(m) == Family::Fw && !problem.has_lmo())
        issues.push_back("method fw: problem " + spec.problem_name + " has no LMO");
  } catch (const Error& e) {
    issues.emplace_back(e.what());
  }
  return issues;
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"acvi", "acvi-inexact", "vacvi", "gda", "eg",
                                              "ogda", "la<k>-<gda|eg|ogda>", "fw"};
  return names;
}

bool is_known_method(const std::string& name) { return family_of(name).has_value(); }

ProblemInstance build_problem(const ExperimentSpec& spec) {
  return make_problem(spec.problem_name, spec.problem_params, spec.problem_seed);
}

SolverTrace execute(const ExperimentSpec& spec, const ProblemInstance& problem) {
  const auto family = family_of(spec.method_name);
  if (!family) throw Error(ErrorKind::InvalidArgument, "unknown method '" + spec.method_name + "'");
  const RunLimits limits = run_limits(spec, problem);
  SolverTrace trace;
  switch (*family) {
    case Family::Acvi: trace = acvi_run(problem, acvi_config(spec, *family), limits); break;
    case Family::AcviInexact:
      trace = acvi_inexact_run(problem, acvi_config(spec, *family), limits);
      break;
    case Family::Vacvi: trace = vacvi_run(problem, acvi_config(spec, *family), limits); break;
    case Family::Baseline: {
      const BaselineMethod method = baseline_method(spec.method_name, spec);
      const ParamView p{spec.method_params, Family::Baseline};
      const ProjectionOracle oracle = ProjectionOracle::for_constraints(
          problem.constraints, p.number("projection_eps", 1e-8));
      trace = run_baseline(problem, method, spec.max_iters.value_or(std::numeric_limits<long>::max()),
                           limits, std::nullopt, oracle);
      break;
    }
    case Family::Fw: trace = fw_run(problem, fw_options(spec), limits); break;
  }
  trace.config_echo = serialize_spec(spec);
  return trace;
}

int sweep_threads() {
  if (const char* env = std::getenv("CVI_SOLVE_THREADS")) {
    try {
      const long n = parse_long(env, "CVI_SOLVE_THREADS");
      if (n >= 1) return static_cast<int>(n);
    } catch (const Error&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<SweepRow> run_sweep(const ExperimentSpec& spec, int threads,
                                std::vector<std::string>* per_run_csv) {
  struct Job {
    double value;
    std::string method;
  };
  std::vector<Job> jobs;
  const std::vector<double> values =
      spec.sweep_axis ? spec.sweep_values : std::vector<double>{0.0};
  for (double v : values)
    for (const auto& m : methods_of(spec)) jobs.push_back({v, m});

  std::vector<SweepRow> rows(jobs.size());
  std::vector<std::string> csvs(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        ExperimentSpec one = with_method(spec, jobs[i].method);
        const std::string axis = spec.sweep_axis.value_or("");
        if (axis == "eta") one.problem_params["eta"] = format_double(jobs[i].value);
        if (axis == "time_budget") one.max_wall_time_s = jobs[i].value;
        if (axis == "threshold") one.stop_threshold = jobs[i].value;
        const ProblemInstance problem = build_problem(one);
        const SolverTrace trace = execute(one, problem);
        const std::string metric = stop_metric(one, problem);
        SweepRow& row = rows[i];
        row.axis_value = jobs[i].value;
        row.method = jobs[i].method;
        row.final_metric = metric_or_nan(trace.last(), metric);
        row.wall_time_s = trace.last().wall_time_s;
        if (one.stop_threshold) {
          row.capped = true;
          for (const auto& rec : trace.records) {
            if (metric_or_nan(rec, metric) <= *one.stop_threshold) {
              row.iters_to_threshold = rec.iter;
              row.capped = false;
              break;
            }
          }
          if (row.capped) row.iters_to_threshold = one.max_iters.value_or(trace.last().iter);
        }
        csvs[i] = trace_to_csv(trace);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  if (per_run_csv) *per_run_csv = std::move(csvs);
  return rows;
}

std::string sweep_summary_csv(const std::vector<SweepRow>& rows) {
  std::string out = "axis_value,method,iters_to_threshold,final_metric,wall_time_s,capped\n";
  for (const auto& r : rows) {
    out += format_double(r.axis_value) + "," + r.method + "," +
           (r.iters_to_threshold ? std::to_string(*r.iters_to_threshold) : "") + "," +
           format_double(r.final_metric) + "," + format_double(r.wall_time_s) + "," +
           (r.capped ? "true" : "false") + "\n";
  }
  return out;
}

namespace {

std::optional<ExperimentSpec> load_and_validate(const std::string& path, std::ostream& err) {
  try {
    ExperimentSpec spec = load_spec(path);
    const auto issues = validate_spec(spec);
    if (issues.empty()) return spec;
    for (const auto& issue : issues) err << "error: " << issue << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  }
  return std::nullopt;
}

void write_svg(const ExperimentSpec& spec, const ProblemInstance& problem, const SolverTrace& trace) {
  const std::string metric = spec.svg_metric.value_or(stop_metric(spec, problem));
  PlotSeries series{trace.method, {}, {}};
  for (const auto& rec : trace.records) {
    series.x.push_back(spec.svg_x == "iter" ? static_cast<double>(rec.iter) : rec.wall_time_s);
    series.y.push_back(metric_or_nan(rec, metric));
  }
  PlotOptions options;
  options.title = problem.name + " / " + trace.method;
  options.x_label = spec.svg_x == "iter" ? "iteration" : "wall time [s]";
  options.y_label = metric;
  options.log_y = spec.svg_log_y;
  write_file_atomic(*spec.svg_path, render_svg({series}, options));
}

}  // namespace

int cli_run(const std::string& spec_path, std::ostream& out, std::ostream& err) {
  const auto spec = load_and_validate(spec_path, err);
  if (!spec) return kValidationError;
  if (!spec->sweep_methods.empty() || spec->sweep_axis) {
    err << "error: sweep keys present; use the sweep subcommand\n";
    return kValidationError;
  }
  const ProblemInstance problem = build_problem(*spec);
  SolverTrace trace;
  try {
    trace = execute(*spec, problem);
  } catch (const Error& e) {
    std::string message = std::string(to_string(e.kind())) + ": " + e.what() + "\n";
    if (e.context())
      message += "outer=" + std::to_string(e.context()->first) +
                 " inner=" + std::to_string(e.context()->second) + "\n";
    write_file_atomic(sidecar_path(*spec, spec_path), message);
    err << "solver error: " << message;
    return kSolverError;
  }
  const std::string csv = trace_to_csv(trace);
  if (spec->csv_path)
    write_file_atomic(*spec->csv_path, csv);
  else
    out << csv;
  if (spec->svg_path) write_svg(*spec, problem, trace);
  if (spec->trace_path) write_file_atomic(*spec->trace_path, trace_to_json(trace));
  if (spec->csv_path) {
    const std::string metric = stop_metric(*spec, problem);
    out << trace.method << " on " << problem.name << ": " << trace.last().iter << " iterations, "
        << metric << " = " << format_double(metric_or_nan(trace.last(), metric)) << '\n';
  }
  return kOk;
}

int cli_sweep(const std::string& spec_path, std::ostream& out, std::ostream& err) {
  const auto spec = load_and_validate(spec_path, err);
  if (!spec) return kValidationError;
  std::vector<std::string> csvs;
  std::vector<SweepRow> rows;
  try {
    rows = run_sweep(*spec, sweep_threads(), &csvs);
  } catch (const Error& e) {
    std::string message = std::string(to_string(e.kind())) + ": " + e.what() + "\n";
    write_file_atomic(spec->summary_path.value_or(spec_path) + ".err.txt", message);
    err << "solver error: " << message;
    return kSolverError;
  }
  namespace fs = std::filesystem;
  const fs::path dir = spec->output_dir.value_or("runs");
  const std::string axis = spec->sweep_axis.value_or("run");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string name = axis + "=" + format_double(rows[i].axis_value) + "_" + rows[i].method + ".csv";
    write_file_atomic((dir / name).string(), csvs[i]);
  }
  const std::string summary = sweep_summary_csv(rows);
  if (spec->summary_path)
    write_file_atomic(*spec->summary_path, summary);
  else
    out << summary;
  return kOk;
}

int cli_compare(const std::string& a, const std::string& b, double tol, std::ostream& out,
                std::ostream& err) {
  CsvTable ta, tb;
  try {
    ta = parse_csv(read_file(a));
    tb = parse_csv(read_file(b));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
  const int ia = ta.column("iter"), ib = tb.column("iter");
  if (ia < 0 || ib < 0) {
    err << "error: both files need an iter column\n";
    return kValidationError;
  }
  static const std::set<std::string> skip{"iter", "outer", "inner", "wall_time_s"};
  std::vector<std::string> shared;
  for (const auto& h : ta.header)
    if (!skip.count(h) && tb.column(h) >= 0) shared.push_back(h);

  std::map<std::string, const std::vector<std::string>*> rows_b;
  for (const auto& row : tb.rows) rows_b[row[ib]] = &row;
  bool aligned = ta.rows.size() == tb.rows.size();
  std::map<std::string, std::pair<double, double>> stats;  // max, sum
  std::map<std::string, long> counts;
  for (const auto& row : ta.rows) {
    const auto it = rows_b.find(row[ia]);
    if (it == rows_b.end()) {
      aligned = false;
      continue;
    }
    for (const auto& col : shared) {
      const std::string& va = row[ta.column(col)];
      const std::string& vb = (*it->second)[tb.column(col)];
      double dev = 0.0;
      if (va.empty() != vb.empty()) {
        dev = std::numeric_limits<double>::infinity();
      } else if (!va.empty()) {
        const double x = parse_double(va, col), y = parse_double(vb, col);
        dev = (std::isnan(x) && std::isnan(y)) ? 0.0 : std::abs(x - y);
        if (std::isnan(dev)) dev = std::numeric_limits<double>::infinity();
      }
      auto& s = stats[col];
      s.first = std::max(s.first, dev);
      s.second += dev;
      ++counts[col];
    }
  }
  double worst = 0.0;
  for (const auto& col : shared) {
    const auto& s = stats[col];
    const long n = std::max(1L, counts[col]);
    out << col << ": max_abs_dev=" << format_double(s.first)
        << " mean_abs_dev=" << format_double(s.second / static_cast<double>(n)) << '\n';
    worst = std::max(worst, s.first);
  }
  if (!aligned) out << "rows differ: " << ta.rows.size() << " vs " << tb.rows.size() << '\n';
  const bool ok = aligned && worst <= tol;
  out << (ok ? "within" : "outside") << " tolerance " << format_double(tol) << '\n';
  return ok ? kOk : kMismatch;
}

int cli_list_problems(std::ostream& out) {
  for (const auto& name : problem_names()) out << name << '\n';
  return kOk;
}

int cli_list_methods(std::ostream& out) {
  for (const auto& name : method_names()) out << name << '\n';
  return kOk;
}

}  // namespace cvi::harness
