#include "visolve/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace visolve {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Reference solutions

Point compute_reference(FiniteSumVI& problem, double tol, std::int64_t max_iterations) {
  if (!(tol > 0.0)) throw std::invalid_argument("compute_reference: tol must be positive");
  double full_l;
  if (problem.constants.full_lipschitz) {
    full_l = *problem.constants.full_lipschitz;
  } else if (problem.constants.lipschitz) {
    full_l = *problem.constants.lipschitz;
  } else {
    full_l = estimate_constants(problem, 64, 7).lipschitz;
  }
  if (!(full_l > 0.0)) throw std::runtime_error("compute_reference: no usable Lipschitz bound");
  const double gamma = 1.0 / (6.0 * full_l);

  Point z = problem.zero_point();
  for (std::int64_t it = 0; it < max_iterations; ++it) {
    const Point f_z = problem.evaluate_full(z);
    // Residuals are reported at unit prox step, which dominates the value
    // at any smaller step.
    const Point unit_map = problem.prox(1.0, z.like(z.coords() - f_z.coords()));
    if ((z.coords() - unit_map.coords()).norm() < tol) {
      problem.set_reference_solution(z, tol);
      return z;
    }
    const Point z_half = problem.prox(gamma, z.like(z.coords() - gamma * f_z.coords()));
    const Point f_half = problem.evaluate_full(z_half);
    z = problem.prox(gamma, z.like(z.coords() - gamma * f_half.coords()));
  }
  throw std::runtime_error("compute_reference: iteration cap reached before residual " +
                           std::to_string(tol));
}

// ---------------------------------------------------------------------------
// Rate fitting

RateFit fit_rate(const RunTrace& trace, size_t window_begin, size_t window_end) {
  if (window_end > trace.records.size() || window_begin >= window_end) {
    throw std::invalid_argument("fit_rate: window out of range");
  }
  // Shrink to the segment before the first non-positive value.
  size_t end = window_begin;
  while (end < window_end) {
    const auto& v = trace.records[end].sq_dist;
    if (!v) throw std::invalid_argument("fit_rate: trace has no sq_dist metric");
    if (!(*v > 0.0)) break;
    ++end;
  }
  if (end - window_begin < 10) {
    throw std::invalid_argument("fit_rate: fewer than 10 usable points in window");
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double count = static_cast<double>(end - window_begin);
  for (size_t k = window_begin; k < end; ++k) {
    const double x = static_cast<double>(trace.iteration_of(k));
    const double y = std::log(*trace.records[k].sq_dist);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = count * sxx - sx * sx;
  const double slope = denom != 0.0 ? (count * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - slope * sx) / count;

  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / count;
  for (size_t k = window_begin; k < end; ++k) {
    const double x = static_cast<double>(trace.iteration_of(k));
    const double y = std::log(*trace.records[k].sq_dist);
    ss_res += (y - intercept - slope * x) * (y - intercept - slope * x);
    ss_tot += (y - mean_y) * (y - mean_y);
  }

  RateFit fit;
  fit.rho_hat = std::exp(slope);
  fit.window_begin = window_begin;
  fit.window_end = end;
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  const size_t total = trace.records.size();
  const size_t decile = std::max<size_t>(1, total / 10);
  std::vector<double> tail;
  for (size_t k = total - decile; k < total; ++k) {
    if (trace.records[k].sq_dist) tail.push_back(*trace.records[k].sq_dist);
  }
  std::sort(tail.begin(), tail.end());
  fit.plateau = tail.empty() ? 0.0 : tail[tail.size() / 2];
  return fit;
}

// ---------------------------------------------------------------------------
// Theorem-bound verification

BoundsReport check_theorem_bounds(const std::vector<RunTrace>& traces,
                                  const FiniteSumVI& problem, double gamma,
                                  BoundKind kind, double slack) {
  if (traces.empty()) throw std::invalid_argument("check_theorem_bounds: no traces");
  if (!problem.reference_solution()) {
    throw std::invalid_argument("check_theorem_bounds: problem has no reference solution");
  }
  if (!problem.constants.strong_monotonicity || !(*problem.constants.strong_monotonicity > 0.0)) {
    throw std::invalid_argument("check_theorem_bounds: needs a positive mu");
  }
  const double mu = *problem.constants.strong_monotonicity;
  const size_t records = traces[0].records.size();
  for (const RunTrace& t : traces) {
    if (t.records.size() != records) {
      throw std::invalid_argument("check_theorem_bounds: traces have unequal record counts");
    }
  }

  auto metric = [&](const TraceRecord& r) -> double {
    if (kind == BoundKind::VrLinear) {
      if (!r.lyapunov) throw std::invalid_argument("check_theorem_bounds: missing lyapunov");
      return *r.lyapunov;
    }
    if (!r.sq_dist) throw std::invalid_argument("check_theorem_bounds: missing sq_dist");
    return *r.sq_dist;
  };

  std::vector<double> mean(records, 0.0);
  for (const RunTrace& t : traces) {
    for (size_t k = 0; k < records; ++k) mean[k] += metric(t.records[k]);
  }
  for (double& m : mean) m /= static_cast<double>(traces.size());

  const int n = traces[0].steps_per_epoch;
  double noise_floor = 0.0;
  double rate = 0.0;
  if (kind == BoundKind::EgNeighborhood) {
    if (!problem.constants.sigma_star_sq) {
      throw std::invalid_argument("check_theorem_bounds: needs sigma_star_sq");
    }
    rate = 1.0 - gamma * mu / 2.0;
    noise_floor = 256.0 * gamma * n * n * *problem.constants.sigma_star_sq / mu;
  } else {
    rate = 1.0 - gamma * mu / 4.0;
  }

  BoundsReport report;
  report.slack = slack;
  report.trace_count = traces.size();
  const double initial = mean[0];
  std::ostringstream detail;
  detail << "iter,mean,bound,ratio\n";
  for (size_t k = 0; k < records; ++k) {
    const auto iter = traces[0].iteration_of(k);
    const double bound = std::pow(rate, static_cast<double>(iter)) * initial + noise_floor;
    const double ratio = mean[k] / bound;
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_iteration = iter;
    }
    if (k == 0 || k == records / 2 || k + 1 == records) {
      detail << iter << ',' << mean[k] << ',' << bound << ',' << ratio << "\n";
    }
  }
  report.pass = report.worst_ratio <= slack;
  report.detail = detail.str();
  return report;
}

// ---------------------------------------------------------------------------
// Config parsing

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "eg") return SolverKind::Eg;
  if (name == "vr-eg") return SolverKind::VrEg;
  if (name == "det-eg") return SolverKind::DetEg;
  throw std::invalid_argument("unknown solver: " + std::string(name));
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Eg: return "eg";
    case SolverKind::VrEg: return "vr-eg";
    case SolverKind::DetEg: return "det-eg";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(value);
  while (in >> item) {
    if (!item.empty() && item.back() == ',') item.pop_back();
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> parse_ini(std::istream& in) {
  std::map<std::string, Section> sections;
  std::string line;
  std::string current = "";
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(line_no) + ": bad section");
      }
      current = trim(line.substr(1, line.size() - 2));
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    sections[current][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return sections;
}

class SectionReader {
 public:
  SectionReader(const Section& section, std::string name)
      : section_(section), name_(std::move(name)) {}

  std::string str(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    const auto it = section_.find(key);
    return it == section_.end() ? fallback : it->second;
  }
  double num(const std::string& key, double fallback) {
    const std::string v = str(key, "");
    return v.empty() ? fallback : std::stod(v);
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const std::string v = str(key, "");
    return v.empty() ? fallback : std::stoll(v);
  }
  bool flag(const std::string& key, bool fallback) {
    const std::string v = str(key, "");
    if (v.empty()) return fallback;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config: bad boolean for " + key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : section_) {
      if (!seen_.count(key)) {
        throw std::runtime_error("config: unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

 private:
  const Section& section_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  const auto sections = parse_ini(in);
  static const Section empty;
  auto section = [&](const std::string& name) -> const Section& {
    const auto it = sections.find(name);
    return it == sections.end() ? empty : it->second;
  };
  for (const auto& [name, body] : sections) {
    if (name != "problem" && name != "solver" && name != "experiment") {
      throw std::runtime_error("config: unknown section [" + name + "]");
    }
  }

  ExperimentConfig config;
  {
    SectionReader p(section("problem"), "problem");
    const std::string family = p.str("family", "affine");
    if (family == "affine") config.problem.family = ProblemFamily::Affine;
    else if (family == "denoise") config.problem.family = ProblemFamily::Denoise;
    else if (family == "adversarial") config.problem.family = ProblemFamily::Adversarial;
    else throw std::runtime_error("config: unknown problem family '" + family + "'");

    config.problem.affine.dimension = p.integer("dimension", 20);
    config.problem.affine.components = static_cast<int>(p.integer("components", 10));
    config.problem.affine.mu = p.num("mu", 1.0);
    config.problem.affine.lipschitz = p.num("L", 4.0);
    config.problem.affine.seed = static_cast<std::uint64_t>(p.integer("seed", 1));

    config.problem.image_path = p.str("image", "");
    config.problem.image_size = static_cast<int>(p.integer("image_size", 64));
    config.problem.noise_sigma = p.num("sigma", 0.05);
    config.problem.noise_seed = static_cast<std::uint64_t>(p.integer("noise_seed", 50));
    config.problem.lambda = p.num("lambda", 8.0);
    config.problem.batch = static_cast<int>(p.integer("batch", 8));
    config.problem.grid_step = p.num("h", 1.0);

    config.problem.data_path = p.str("data", "");
    config.problem.synthetic_samples = static_cast<int>(p.integer("n_samples", 512));
    config.problem.synthetic_features = static_cast<int>(p.integer("n_features", 50));
    config.problem.synthetic_seed = static_cast<std::uint64_t>(p.integer("data_seed", 1));
    config.problem.adv_lambda = p.num("adv_lambda", 0.5);
    config.problem.adv_beta = p.num("beta", 1.0);
    config.problem.adv_radius = p.num("radius", 1.0);
    config.problem.batch_size = static_cast<int>(p.integer("batch_size", 4));
    config.problem.regularize_mu = p.num("regularize_mu", 0.0);
    p.reject_unknown();
  }
  {
    SectionReader s(section("solver"), "solver");
    config.solver = parse_solver_kind(s.str("method", "eg"));
    config.solver_config.gamma = s.num("gamma", 0.0);
    config.solver_config.epochs = static_cast<int>(s.integer("epochs", 100));
    config.solver_config.alpha = s.num("alpha", 0.0);
    config.solver_config.snapshot_prob = s.num("p", 0.0);
    const std::string cadence = s.str("cadence", "epoch");
    if (cadence == "epoch") config.solver_config.cadence = MetricCadence::EveryEpoch;
    else if (cadence == "iteration") config.solver_config.cadence = MetricCadence::EveryIteration;
    else throw std::runtime_error("config: cadence must be epoch or iteration");
    config.solver_config.seed = static_cast<std::uint64_t>(s.integer("seed", 50));
    config.solver_config.stop.residual_tolerance = s.num("residual_tol", 0.0);
    config.solver_config.stop.max_oracle_calls = s.integer("max_oracle_calls", 0);
    s.reject_unknown();
  }
  {
    SectionReader e(section("experiment"), "experiment");
    for (const std::string& name : split_list(e.str("schedules", "rr"))) {
      config.schedules.push_back(parse_schedule_kind(name));
    }
    const std::string seeds = e.str("seeds", "");
    if (!seeds.empty()) {
      for (const std::string& s : split_list(seeds)) {
        config.seeds.push_back(std::stoull(s));
      }
    } else {
      // The experiments in the source material fix random state 50; default
      // seed lists start there and increment.
      const auto start = static_cast<std::uint64_t>(e.integer("seed_start", 50));
      const auto count = e.integer("seed_count", 1);
      for (std::int64_t k = 0; k < count; ++k) config.seeds.push_back(start + static_cast<std::uint64_t>(k));
    }
    config.output_dir = e.str("output", "out");
    config.reference_path = e.str("reference", "");
    config.reference_tol = e.num("reference_tol", 1e-9);
    config.save_images = e.flag("save_images", false);
    e.reject_unknown();
  }
  if (config.schedules.empty() || config.seeds.empty()) {
    throw std::runtime_error("config: need at least one schedule and one seed");
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse_experiment_config(in);
}

FiniteSumVI build_problem(const ExperimentConfig& config) {
  const ProblemSpecConfig& p = config.problem;
  std::optional<FiniteSumVI> problem;
  switch (p.family) {
    case ProblemFamily::Affine:
      problem = make_affine_saddle(p.affine);
      break;
    case ProblemFamily::Denoise: {
      GrayImage clean = p.image_path.empty()
                            ? make_shapes_image(p.image_size, p.image_size)
                            : load_pgm_file(p.image_path);
      DenoisingSpec spec;
      spec.noisy = add_gaussian_noise(clean, p.noise_sigma, p.noise_seed);
      spec.lambda = p.lambda;
      spec.batch = p.batch;
      spec.grid_step = p.grid_step;
      problem = make_denoising(spec);
      break;
    }
    case ProblemFamily::Adversarial: {
      AdversarialSpec spec;
      spec.data = p.data_path.empty()
                      ? make_synthetic_regression(p.synthetic_samples, p.synthetic_features,
                                                  p.synthetic_seed)
                      : load_libsvm_file(p.data_path);
      spec.lambda = p.adv_lambda;
      spec.beta = p.adv_beta;
      spec.radius = p.adv_radius;
      spec.batch_size = p.batch_size;
      problem = make_adversarial(spec);
      break;
    }
  }
  if (p.regularize_mu > 0.0) {
    problem = regularize_operator(*problem, p.regularize_mu, problem->zero_point());
  }
  if (!config.reference_path.empty() && fs::exists(config.reference_path)) {
    problem->set_reference_solution(
        problem->make_point(read_point_file(config.reference_path)), config.reference_tol);
  }
  return std::move(*problem);
}

void write_point_file(const Point& point, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  for (Eigen::Index k = 0; k < point.dim(); ++k) out << point.coords()[k] << "\n";
}

Eigen::VectorXd read_point_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

// ---------------------------------------------------------------------------
// Runs and manifests

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a_hex(buffer.str());
}

namespace {

RunTrace run_cell(const FiniteSumVI& problem, const ExperimentConfig& config,
                  ScheduleKind kind, std::uint64_t seed, double gamma) {
  SolverConfig solver_config = config.solver_config;
  solver_config.gamma = gamma;
  solver_config.seed = seed;
  if (config.solver == SolverKind::DetEg) {
    return run_deterministic_eg(problem, solver_config);
  }
  Schedule schedule(kind, problem.component_count(), seed);
  return config.solver == SolverKind::Eg ? run_eg(problem, schedule, solver_config)
                                         : run_vr_eg(problem, schedule, solver_config);
}

double resolve_gamma(const ExperimentConfig& config, const FiniteSumVI& problem) {
  if (config.solver_config.gamma > 0.0) return config.solver_config.gamma;
  const auto& c = problem.constants;
  const int n = problem.component_count();
  switch (config.solver) {
    case SolverKind::Eg:
      if (c.strong_monotonicity && *c.strong_monotonicity > 0.0 && c.lipschitz) {
        return default_step_eg(*c.strong_monotonicity, *c.lipschitz, n);
      }
      break;
    case SolverKind::VrEg:
      if (c.strong_monotonicity && *c.strong_monotonicity > 0.0 && c.lipschitz) {
        const double p = config.solver_config.snapshot_prob > 0.0
                             ? config.solver_config.snapshot_prob
                             : 1.0 / n;
        const double alpha =
            config.solver_config.alpha > 0.0 ? config.solver_config.alpha : 1.0 - p;
        return default_step_vr(*c.strong_monotonicity, *c.lipschitz, alpha);
      }
      break;
    case SolverKind::DetEg: {
      const double l = c.full_lipschitz ? *c.full_lipschitz : c.lipschitz.value_or(0.0);
      if (l > 0.0) return 1.0 / (6.0 * l);
      break;
    }
  }
  throw std::runtime_error(
      "config: gamma not given and the problem lacks the constants for the default step");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& config_text) {
  const FiniteSumVI problem = build_problem(config);
  const double gamma = resolve_gamma(config, problem);
  fs::create_directories(config.output_dir);

  struct CellSpec {
    ScheduleKind kind;
    std::string label;
    std::uint64_t seed;
  };
  std::vector<CellSpec> specs;
  if (config.solver == SolverKind::DetEg) {
    for (std::uint64_t seed : config.seeds) specs.push_back({ScheduleKind::Cyclic, "det", seed});
  } else {
    for (ScheduleKind kind : config.schedules) {
      for (std::uint64_t seed : config.seeds) {
        specs.push_back({kind, to_string(kind), seed});
      }
    }
  }

  ExperimentResult result;
  result.cells.resize(specs.size());

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next.fetch_add(1); k < specs.size(); k = next.fetch_add(1)) {
      const CellSpec& spec = specs[k];
      CellResult& cell = result.cells[k];
      cell.schedule = spec.label;
      cell.seed = spec.seed;
      try {
        const RunTrace trace = run_cell(problem, config, spec.kind, spec.seed, gamma);
        const fs::path file =
            fs::path(config.output_dir) / (spec.label + "_" + std::to_string(spec.seed) + ".csv");
        write_trace_file(trace, file.string());
        cell.file = file.string();
        cell.hash = hash_file(cell.file);
        if (config.save_images && config.problem.family == ProblemFamily::Denoise &&
            trace.final_iterate.size() > 0) {
          GrayImage u;
          u.height = config.problem.image_size;
          u.width = config.problem.image_size;
          u.pixels = trace.final_iterate.head(
              static_cast<Eigen::Index>(u.height) * u.width);
          const fs::path image = fs::path(config.output_dir) /
                                 (spec.label + "_" + std::to_string(spec.seed) + "_u.pgm");
          save_pgm_file(u, image.string());
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const size_t threads =
      std::min<size_t>(specs.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  json manifest;
  manifest["config_hash"] = fnv1a_hex(config_text);
  manifest["config"] = config_text;
  manifest["gamma"] = gamma;
  manifest["environment"] = {{"compiler", __VERSION__},
                             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                           std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                           std::to_string(EIGEN_MINOR_VERSION)}};
  json cells = json::array();
  for (const CellResult& cell : result.cells) {
    json entry = {{"schedule", cell.schedule}, {"seed", cell.seed}};
    if (cell.error.empty()) {
      entry["file"] = fs::path(cell.file).filename().string();
      entry["hash"] = cell.hash;
    } else {
      entry["error"] = cell.error;
      ++result.failures;
    }
    cells.push_back(entry);
  }
  manifest["cells"] = cells;

  const fs::path manifest_path = fs::path(config.output_dir) / "manifest.json";
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << "\n";
  result.manifest_path = manifest_path.string();
  return result;
}

std::vector<std::string> verify_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  json manifest;
  in >> manifest;
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<std::string> mismatches;
  for (const auto& cell : manifest.at("cells")) {
    if (cell.contains("error")) continue;
    const std::string file = (dir / cell.at("file").get<std::string>()).string();
    try {
      if (hash_file(file) != cell.at("hash").get<std::string>()) {
        mismatches.push_back(file + ": hash mismatch");
      }
    } catch (const std::exception& e) {
      mismatches.push_back(std::string(e.what()));
    }
  }
  return mismatches;
}

// ---------------------------------------------------------------------------
// Plot data

namespace {

struct MetricPresence {
  bool sq_dist = false;
  bool lyapunov = false;
};

MetricPresence metric_presence(const std::vector<RunTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("plot data: no traces");
  MetricPresence presence{traces[0].records.at(0).sq_dist.has_value(),
                          traces[0].records.at(0).lyapunov.has_value()};
  for (const RunTrace& t : traces) {
    for (const TraceRecord& r : t.records) {
      if (r.sq_dist.has_value() != presence.sq_dist ||
          r.lyapunov.has_value() != presence.lyapunov) {
        throw std::invalid_argument("plot data: inconsistent metric sets across traces");
      }
    }
  }
  return presence;
}

std::string format_plot_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(values.size() - 1, lo + 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

void emit_plot_long(const std::vector<RunTrace>& traces, std::ostream& out) {
  const MetricPresence presence = metric_presence(traces);
  out << "schedule,seed,oracle_calls,metric,value\n";
  for (const RunTrace& t : traces) {
    for (const TraceRecord& r : t.records) {
      if (presence.sq_dist) {
        out << t.schedule << ',' << t.seed << ',' << r.oracle_calls << ",sq_dist,"
            << format_plot_double(*r.sq_dist) << "\n";
      }
      if (presence.lyapunov) {
        out << t.schedule << ',' << t.seed << ',' << r.oracle_calls << ",lyapunov,"
            << format_plot_double(*r.lyapunov) << "\n";
      }
      out << t.schedule << ',' << t.seed << ',' << r.oracle_calls << ",residual,"
          << format_plot_double(r.residual) << "\n";
    }
  }
}

void emit_plot_aggregate(const std::vector<RunTrace>& traces, std::ostream& out) {
  const MetricPresence presence = metric_presence(traces);
  std::vector<std::string> metrics = {"residual"};
  if (presence.sq_dist) metrics.insert(metrics.begin(), "sq_dist");
  if (presence.lyapunov) metrics.insert(metrics.end() - 1, "lyapunov");

  // Group traces by schedule; seeds align on the record index so runs with
  // random oracle costs (VR snapshots) still aggregate.
  std::map<std::string, std::vector<const RunTrace*>> by_schedule;
  for (const RunTrace& t : traces) by_schedule[t.schedule].push_back(&t);

  out << "schedule,metric,record,oracle_calls_median,median,q1,q3\n";
  for (const auto& [schedule, group] : by_schedule) {
    size_t records = group[0]->records.size();
    for (const RunTrace* t : group) records = std::min(records, t->records.size());
    for (const std::string& metric : metrics) {
      for (size_t k = 0; k < records; ++k) {
        std::vector<double> values;
        std::vector<double> calls;
        for (const RunTrace* t : group) {
          const TraceRecord& r = t->records[k];
          calls.push_back(static_cast<double>(r.oracle_calls));
          if (metric == "sq_dist") values.push_back(*r.sq_dist);
          else if (metric == "lyapunov") values.push_back(*r.lyapunov);
          else values.push_back(r.residual);
        }
        out << schedule << ',' << metric << ',' << k << ','
            << format_plot_double(quantile(calls, 0.5)) << ','
            << format_plot_double(quantile(values, 0.5)) << ','
            << format_plot_double(quantile(values, 0.25)) << ','
            << format_plot_double(quantile(values, 0.75)) << "\n";
      }
    }
  }
}

}  // namespace visolve
