// Experiment runner: declarative configs, schedule x seed sweeps with
// per-cell trace CSVs and a hashed manifest, reference-solution
// computation, empirical rate fitting, and convergence-bound checks.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "visolve/problems.hpp"
#include "visolve/solvers.hpp"

namespace visolve {

// ---------------------------------------------------------------------------
// Reference solutions

// Runs the full-operator extragradient with gamma = 1/(6 L) (L from the
// stored full-operator bound, else an estimate) until the natural residual
// drops below tol, then stores the point into the problem. Throws if the
// iteration cap is hit first.
Point compute_reference(FiniteSumVI& problem, double tol,
                        std::int64_t max_iterations = 2'000'000);

// ---------------------------------------------------------------------------
// Rate fitting

struct RateFit {
  double rho_hat = 1.0;   // per-iteration contraction factor
  double plateau = 0.0;   // median of the trace's last decile
  size_t window_begin = 0;
  size_t window_end = 0;  // half-open, record indices
  double r_squared = 1.0;
};

// Least-squares slope of log(sq_dist) against the iteration counter over
// [window_begin, window_end). Non-positive values inside the window shrink
// it to the segment before the first one; at least 10 points must remain.
RateFit fit_rate(const RunTrace& trace, size_t window_begin, size_t window_end);

// ---------------------------------------------------------------------------
// Theorem-bound verification

enum class BoundKind {
  EgNeighborhood,  // (1 - gamma mu / 2)^k d0 + 256 gamma n^2 sigma^2 / mu on mean sq_dist
  VrLinear,        // (1 - gamma mu / 4)^k V0 on mean Lyapunov
};

struct BoundsReport {
  bool pass = false;
  double slack = 1.0;
  double worst_ratio = 0.0;  // max over records of mean / bound
  std::int64_t worst_iteration = 0;
  size_t trace_count = 0;
  std::string detail;        // human-readable summary table
};

// Compares the across-seed mean curve against the closed-form envelope at
// every recorded iteration; PASS iff mean <= slack * bound throughout.
// Requires the problem's reference solution and constants.
BoundsReport check_theorem_bounds(const std::vector<RunTrace>& traces,
                                  const FiniteSumVI& problem, double gamma,
                                  BoundKind kind, double slack);

// ---------------------------------------------------------------------------
// Declarative experiment configs (INI-style `key = value` under [sections])

enum class ProblemFamily { Affine, Denoise, Adversarial };
enum class SolverKind { Eg, VrEg, DetEg };

SolverKind parse_solver_kind(std::string_view name);  // eg | vr-eg | det-eg
std::string to_string(SolverKind kind);

struct ProblemSpecConfig {
  ProblemFamily family = ProblemFamily::Affine;
  AffineSaddleSpec affine;
  // Denoising inputs: an image path or the builtin synthetic shapes image.
  std::string image_path;           // empty = synthetic shapes
  int image_size = 64;
  double noise_sigma = 0.05;
  std::uint64_t noise_seed = 50;
  double lambda = 8.0;
  int batch = 8;
  double grid_step = 1.0;
  // Adversarial inputs: a LIBSVM path or synthetic regression data.
  std::string data_path;            // empty = synthetic
  int synthetic_samples = 512;
  int synthetic_features = 50;
  std::uint64_t synthetic_seed = 1;
  double adv_lambda = 0.5;
  double adv_beta = 1.0;
  double adv_radius = 1.0;
  int batch_size = 4;
  // Optional regularization wrapper around any family.
  double regularize_mu = 0.0;
};

struct ExperimentConfig {
  ProblemSpecConfig problem;
  SolverKind solver = SolverKind::Eg;
  SolverConfig solver_config;
  std::vector<ScheduleKind> schedules;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  std::string reference_path;  // optional precomputed reference point
  double reference_tol = 1e-9;
  bool save_images = false;    // write denoised PGMs per cell
};

ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

// Problem construction shared by the CLI subcommands. Attaches the
// reference solution from reference_path (or the analytic one) when
// available.
FiniteSumVI build_problem(const ExperimentConfig& config);

// Reference point file format: one coordinate per line.
void write_point_file(const Point& point, const std::string& path);
Eigen::VectorXd read_point_file(const std::string& path);

// ---------------------------------------------------------------------------
// Runs and manifests

struct CellResult {
  std::string schedule;
  std::uint64_t seed = 0;
  std::string file;       // trace CSV path, empty on failure
  std::string hash;       // fnv1a-64 of the file contents
  std::string error;      // non-empty when the cell aborted
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::string manifest_path;
  int failures = 0;
};

// One solver run per (schedule, seed): cells execute concurrently, each
// writing `<schedule>_<seed>.csv`; the manifest records the config hash and
// a content hash per emitted file. Cell errors are recorded, not fatal.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& config_text);

// Re-hashes every file listed in the manifest; returns mismatches.
std::vector<std::string> verify_manifest(const std::string& manifest_path);

std::string fnv1a_hex(const std::string& bytes);
std::string hash_file(const std::string& path);

// ---------------------------------------------------------------------------
// Plot data

// Long format: schedule,seed,oracle_calls,metric,value for every record and
// every metric present; all traces must carry the same metric set.
void emit_plot_long(const std::vector<RunTrace>& traces, std::ostream& out);

// Median and interquartile range across seeds, grouped by schedule, metric
// and record index: schedule,metric,record,oracle_calls_median,median,q1,q3.
void emit_plot_aggregate(const std::vector<RunTrace>& traces, std::ostream& out);

}  // namespace visolve
