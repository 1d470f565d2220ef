// Per-iteration metric records produced by solver runs, with CSV
// serialization. Header: epoch,step,oracle_calls,sq_dist,lyapunov,residual;
// missing metrics are empty fields. Run metadata travels in leading
// `# key=value` comment lines.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace visolve {

struct TraceRecord {
  int epoch = 0;
  int step = 0;
  std::int64_t oracle_calls = 0;
  std::optional<double> sq_dist;   // |z - z*|^2 when z* is known
  std::optional<double> lyapunov;  // |z - z*|^2 + |omega - z*|^2 (VR runs)
  double residual = 0.0;
};

struct RunTrace {
  std::string solver;    // eg | vr-eg | det-eg
  std::string schedule;  // independent | rr | so | cyclic | -
  double gamma = 0.0;
  std::uint64_t seed = 0;
  int steps_per_epoch = 1;
  std::vector<TraceRecord> records;
  Eigen::VectorXd final_iterate;  // in-memory only, not serialized

  // Global iteration count of record k (initial record is iteration 0).
  std::int64_t iteration_of(size_t k) const;

  void write_csv(std::ostream& out) const;
  static RunTrace read_csv(std::istream& in);
};

void write_trace_file(const RunTrace& trace, const std::string& path);
RunTrace read_trace_file(const std::string& path);

}  // namespace visolve
