#pragma once

#include <string>
#include <vector>

#include "cvi/core.hpp"

namespace cvi::harness {

/// Trace as CSV: `iter,outer,inner,wall_time_s,<metrics>`. Metric columns are
/// the standard metrics present in any record, in the standard order; a
/// metric missing from a row is left empty.
std::string trace_to_csv(const SolverTrace& trace);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position or -1.
  int column(const std::string& name) const;
};

/// Parses comma-separated text without quoting. Throws Error(InvalidArgument)
/// on ragged rows.
CsvTable parse_csv(const std::string& text);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// JSON dump of every record including iterates.
std::string trace_to_json(const SolverTrace& trace);

}  // namespace cvi::harness
