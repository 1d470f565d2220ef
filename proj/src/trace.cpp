#include "visolve/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace visolve {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::optional<double> parse_optional(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return std::stod(field);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::int64_t RunTrace::iteration_of(size_t k) const {
  const TraceRecord& r = records.at(k);
  return static_cast<std::int64_t>(r.epoch) * steps_per_epoch + r.step;
}

void RunTrace::write_csv(std::ostream& out) const {
  out << "# solver=" << solver << "\n";
  out << "# schedule=" << schedule << "\n";
  out << "# gamma=" << format_double(gamma) << "\n";
  out << "# seed=" << seed << "\n";
  out << "# steps_per_epoch=" << steps_per_epoch << "\n";
  out << "epoch,step,oracle_calls,sq_dist,lyapunov,residual\n";
  for (const TraceRecord& r : records) {
    out << r.epoch << ',' << r.step << ',' << r.oracle_calls << ',';
    if (r.sq_dist) out << format_double(*r.sq_dist);
    out << ',';
    if (r.lyapunov) out << format_double(*r.lyapunov);
    out << ',' << format_double(r.residual) << "\n";
  }
}

RunTrace RunTrace::read_csv(std::istream& in) {
  RunTrace trace;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      std::string value = line.substr(eq + 1);
      while (!key.empty() && key.front() == ' ') key.erase(key.begin());
      while (!key.empty() && key.back() == ' ') key.pop_back();
      if (key == "solver") trace.solver = value;
      else if (key == "schedule") trace.schedule = value;
      else if (key == "gamma") trace.gamma = std::stod(value);
      else if (key == "seed") trace.seed = std::stoull(value);
      else if (key == "steps_per_epoch") trace.steps_per_epoch = std::stoi(value);
      continue;
    }
    if (!header_seen) {
      if (line != "epoch,step,oracle_calls,sq_dist,lyapunov,residual") {
        throw std::runtime_error("trace csv: unexpected header at line " +
                                 std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 6) {
      throw std::runtime_error("trace csv: malformed row at line " + std::to_string(line_no));
    }
    TraceRecord r;
    r.epoch = std::stoi(fields[0]);
    r.step = std::stoi(fields[1]);
    r.oracle_calls = std::stoll(fields[2]);
    r.sq_dist = parse_optional(fields[3]);
    r.lyapunov = parse_optional(fields[4]);
    r.residual = std::stod(fields[5]);
    trace.records.push_back(r);
  }
  if (!header_seen) throw std::runtime_error("trace csv: missing header");
  return trace;
}

void write_trace_file(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  trace.write_csv(out);
}

RunTrace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return RunTrace::read_csv(in);
}

}  // namespace visolve
