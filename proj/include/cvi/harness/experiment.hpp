#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cvi/core.hpp"
#include "cvi/harness/spec_file.hpp"

namespace cvi::harness {

enum ExitCode : int { kOk = 0, kMismatch = 1, kValidationError = 2, kSolverError = 3 };

/// acvi, acvi-inexact, vacvi, gda, eg, ogda, la<k>-<base>, fw.
const std::vector<std::string>& method_names();

bool is_known_method(const std::string& name);

ProblemInstance build_problem(const ExperimentSpec& spec);

/// Runs the spec's method on `problem` under the spec's budget and stop rule.
SolverTrace execute(const ExperimentSpec& spec, const ProblemInstance& problem);

struct SweepRow {
  double axis_value = 0.0;
  std::string method;
  /// Empty when no threshold is set.
  std::optional<long> iters_to_threshold;
  double final_metric = 0.0;
  double wall_time_s = 0.0;
  bool capped = false;
};

/// Number of worker threads for sweeps: CVI_SOLVE_THREADS if set, else the
/// hardware concurrency.
int sweep_threads();

/// One run per (axis value, method); rows ordered like the inputs.
std::vector<SweepRow> run_sweep(const ExperimentSpec& spec, int threads,
                                std::vector<std::string>* per_run_csv = nullptr);

std::string sweep_summary_csv(const std::vector<SweepRow>& rows);

int cli_run(const std::string& spec_path, std::ostream& out, std::ostream& err);
int cli_sweep(const std::string& spec_path, std::ostream& out, std::ostream& err);
/// Aligns rows by iteration and compares every shared metric column.
int cli_compare(const std::string& a, const std::string& b, double tol, std::ostream& out,
                std::ostream& err);
int cli_list_problems(std::ostream& out);
int cli_list_methods(std::ostream& out);

}  // namespace cvi::harness
