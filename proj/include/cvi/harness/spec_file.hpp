#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cvi::harness {

/**
 * One experiment (or sweep) as read from a spec file.
 *
 * Grammar: one `key = value` per line, `#` starts a comment, blank lines are
 * ignored, keys are dotted paths. Unknown sections are rejected; keys under
 * `problem.` other than name/seed are problem parameters and keys under
 * `method.` other than name are method hyperparameters, both validated
 * against the chosen problem or method.
 */
struct ExperimentSpec {
  std::string problem_name;
  std::map<std::string, std::string> problem_params;
  std::uint64_t problem_seed = 0;

  std::string method_name;
  std::map<std::string, std::string> method_params;

  std::optional<long> max_iters;
  std::optional<double> max_wall_time_s;

  /// Defaults to the problem's default metric.
  std::optional<std::string> stop_metric;
  std::optional<double> stop_threshold;

  std::optional<std::string> csv_path;
  std::optional<std::string> svg_path;
  std::optional<std::string> trace_path;
  std::optional<std::string> svg_metric;
  /// "iter" or "wall_time".
  std::string svg_x = "iter";
  bool svg_log_y = true;

  std::uint64_t run_seed = 0;

  /// "eta", "time_budget" or "threshold".
  std::optional<std::string> sweep_axis;
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_methods;
  std::optional<std::string> summary_path;
  std::optional<std::string> output_dir;
};

/// Throws Error(InvalidArgument) naming the offending line or key.
ExperimentSpec parse_spec(const std::string& text);

ExperimentSpec load_spec(const std::string& path);

/// Text that parse_spec maps back to an equal spec.
std::string serialize_spec(const ExperimentSpec& spec);

/// Violated spec invariants (unknown names, missing budget, bad parameters).
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Strict number parsing; throws Error(InvalidArgument) mentioning `what`.
double parse_double(const std::string& text, const std::string& what);
long parse_long(const std::string& text, const std::string& what);

}  // namespace cvi::harness
