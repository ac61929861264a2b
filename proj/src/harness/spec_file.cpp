#include "cvi/harness/spec_file.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "cvi/error.hpp"

namespace cvi::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw Error(ErrorKind::InvalidArgument, key + " must be true or false");
}

std::uint64_t parse_seed(const std::string& value, const std::string& key) {
  std::uint64_t seed = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
  if (ec != std::errc() || end != value.data() + value.size())
    throw Error(ErrorKind::InvalidArgument, key + " must be a non-negative integer");
  return seed;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, end);
}

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [end, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || end != last || first == last)
    throw Error(ErrorKind::InvalidArgument, what + " is not a number: '" + text + "'");
  return value;
}

long parse_long(const std::string& text, const std::string& what) {
  long value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw Error(ErrorKind::InvalidArgument, what + " is not an integer: '" + text + "'");
  return value;
}

ExperimentSpec parse_spec(const std::string& text) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::InvalidArgument,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate key '" + key + "'");

    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? key : key.substr(0, dot);
    const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
    if (key == "run_seed") {
      spec.run_seed = parse_seed(value, key);
    } else if (section == "problem" && !field.empty()) {
      if (field == "name")
        spec.problem_name = value;
      else if (field == "seed")
        spec.problem_seed = parse_seed(value, key);
      else
        spec.problem_params[field] = value;
    } else if (section == "method" && !field.empty()) {
      if (field == "name")
        spec.method_name = value;
      else
        spec.method_params[field] = value;
    } else if (key == "budget.max_iters") {
      spec.max_iters = parse_long(value, key);
    } else if (key == "budget.max_wall_time_s") {
      spec.max_wall_time_s = parse_double(value, key);
    } else if (key == "stop.metric") {
      spec.stop_metric = value;
    } else if (key == "stop.threshold") {
      spec.stop_threshold = parse_double(value, key);
    } else if (key == "output.csv") {
      spec.csv_path = value;
    } else if (key == "output.svg") {
      spec.svg_path = value;
    } else if (key == "output.trace") {
      spec.trace_path = value;
    } else if (key == "output.svg_metric") {
      spec.svg_metric = value;
    } else if (key == "output.svg_x") {
      spec.svg_x = value;
    } else if (key == "output.svg_log_y") {
      spec.svg_log_y = parse_bool(value, key);
    } else if (key == "sweep.axis") {
      spec.sweep_axis = value;
    } else if (key == "sweep.values") {
      for (const auto& item : split_list(value)) spec.sweep_values.push_back(parse_double(item, key));
    } else if (key == "sweep.methods") {
      spec.sweep_methods = split_list(value);
    } else if (key == "sweep.summary") {
      spec.summary_path = value;
    } else if (key == "sweep.output_dir") {
      spec.output_dir = value;
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown key '" + key + "'");
    }
  }
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read spec file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str());
}

std::string serialize_spec(const ExperimentSpec& spec) {
  std::ostringstream out;
  const auto line = [&](const std::string& key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  line("run_seed", std::to_string(spec.run_seed));
  line("problem.name", spec.problem_name);
  line("problem.seed", std::to_string(spec.problem_seed));
  for (const auto& [k, v] : spec.problem_params) line("problem." + k, v);
  line("method.name", spec.method_name);
  for (const auto& [k, v] : spec.method_params) line("method." + k, v);
  if (spec.max_iters) line("budget.max_iters", std::to_string(*spec.max_iters));
  if (spec.max_wall_time_s) line("budget.max_wall_time_s", format_double(*spec.max_wall_time_s));
  if (spec.stop_metric) line("stop.metric", *spec.stop_metric);
  if (spec.stop_threshold) line("stop.threshold", format_double(*spec.stop_threshold));
  if (spec.csv_path) line("output.csv", *spec.csv_path);
  if (spec.svg_path) line("output.svg", *spec.svg_path);
  if (spec.trace_path) line("output.trace", *spec.trace_path);
  if (spec.svg_metric) line("output.svg_metric", *spec.svg_metric);
  line("output.svg_x", spec.svg_x);
  line("output.svg_log_y", spec.svg_log_y ? "true" : "false");
  if (spec.sweep_axis) line("sweep.axis", *spec.sweep_axis);
  if (!spec.sweep_values.empty()) {
    std::string values;
    for (double v : spec.sweep_values) values += (values.empty() ? "" : ",") + format_double(v);
    line("sweep.values", values);
  }
  if (!spec.sweep_methods.empty()) {
    std::string methods;
    for (const auto& m : spec.sweep_methods) methods += (methods.empty() ? "" : ",") + m;
    line("sweep.methods", methods);
  }
  if (spec.summary_path) line("sweep.summary", *spec.summary_path);
  if (spec.output_dir) line("sweep.output_dir", *spec.output_dir);
  return out.str();
}

}  // namespace cvi::harness
