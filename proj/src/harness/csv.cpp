#include "cvi/harness/csv.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "cvi/harness/spec_file.hpp"
#include "cvi/metrics.hpp"

namespace cvi::harness {

std::string trace_to_csv(const SolverTrace& trace) {
  std::vector<std::string> columns;
  for (const auto& name : metric_names()) {
    for (const auto& rec : trace.records) {
      if (rec.metrics.count(name)) {
        columns.push_back(name);
        break;
      }
    }
  }
  std::string out = "iter,outer,inner,wall_time_s";
  for (const auto& c : columns) out += "," + c;
  out += '\n';
  for (const auto& rec : trace.records) {
    out += std::to_string(rec.iter) + "," + std::to_string(rec.t) + "," + std::to_string(rec.k) +
           "," + format_double(rec.wall_time_s);
    for (const auto& c : columns) {
      out += ',';
      if (auto it = rec.metrics.find(c); it != rec.metrics.end()) out += format_double(it->second);
    }
    out += '\n';
  }
  return out;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::stringstream stream(text);
  std::string line;
  bool first = true;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size())
        throw Error(ErrorKind::InvalidArgument, "ragged CSV row: " + line);
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw Error(ErrorKind::InvalidArgument, "CSV has no header");
  return table;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  static std::atomic<unsigned long> counter{0};
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path temp = target.string() + ".tmp." + std::to_string(::getpid()) + "." +
                        std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + temp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + temp.string());
  }
  fs::rename(temp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string trace_to_json(const SolverTrace& trace) {
  using nlohmann::json;
  const auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json records = json::array();
  for (const auto& rec : trace.records) {
    json r{{"iter", rec.iter}, {"outer", rec.t}, {"inner", rec.k},
           {"wall_time_s", rec.wall_time_s}, {"x", vec(rec.x)}, {"metrics", rec.metrics}};
    if (rec.y) r["y"] = vec(*rec.y);
    if (rec.lambda) r["lambda"] = vec(*rec.lambda);
    records.push_back(std::move(r));
  }
  json doc{{"method", trace.method}, {"config", trace.config_echo}, {"records", std::move(records)}};
  return doc.dump(1) + "\n";
}

}  // namespace cvi::harness
