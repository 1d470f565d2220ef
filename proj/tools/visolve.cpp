// Benchmark CLI: runs schedule x seed experiment sweeps, computes reference
// solutions, checks convergence-theory envelopes on recorded traces, emits
// plot-ready CSVs, and fetches the LIBSVM datasets.
//
// Exit codes: 0 success / bound PASS, 1 bound FAIL, 2 input error.
#include "visolve/experiment.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace visolve;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int cmd_run(const std::string& config_path) {
  const std::string config_text = read_file(config_path);
  std::istringstream stream(config_text);
  const ExperimentConfig config = parse_experiment_config(stream);
  const ExperimentResult result = run_experiment(config, config_text);
  for (const CellResult& cell : result.cells) {
    if (cell.error.empty()) {
      std::cout << cell.schedule << " seed=" << cell.seed << " -> " << cell.file << "\n";
    } else {
      std::cout << cell.schedule << " seed=" << cell.seed << " FAILED: " << cell.error << "\n";
    }
  }
  std::cout << "manifest: " << result.manifest_path << "\n";
  if (result.failures > 0) {
    std::cerr << result.failures << " cell(s) failed\n";
    return 1;
  }
  return 0;
}

int cmd_reference(const std::string& config_path, double tol) {
  const ExperimentConfig config = load_experiment_config(config_path);
  FiniteSumVI problem = build_problem(config);
  if (problem.reference_solution()) {
    std::cout << "problem already carries a reference solution\n";
  }
  const Point reference = compute_reference(problem, tol);
  fs::create_directories(config.output_dir);
  const std::string path = config.reference_path.empty()
                               ? (fs::path(config.output_dir) / "reference.txt").string()
                               : config.reference_path;
  write_point_file(reference, path);
  std::cout << "reference written to " << path
            << " (residual < " << tol << ")\n";
  if (config.problem.family == ProblemFamily::Denoise) {
    GrayImage u;
    u.height = config.problem.image_size;
    u.width = config.problem.image_size;
    u.pixels = reference.coords().head(static_cast<Eigen::Index>(u.height) * u.width);
    const std::string image_path = (fs::path(config.output_dir) / "reference_u.pgm").string();
    save_pgm_file(u, image_path);
    std::cout << "denoised image written to " << image_path << "\n";
  }
  return 0;
}

int cmd_check(const std::string& trace_dir, double slack_override) {
  const std::string manifest_path = (fs::path(trace_dir) / "manifest.json").string();
  const auto mismatches = verify_manifest(manifest_path);
  for (const std::string& m : mismatches) std::cerr << "manifest: " << m << "\n";
  if (!mismatches.empty()) return 2;

  // Rebuild the problem from the config embedded in the manifest.
  std::ifstream in(manifest_path);
  nlohmann::json manifest;
  in >> manifest;
  const std::string config_text = manifest.at("config").get<std::string>();
  std::istringstream stream(config_text);
  const ExperimentConfig config = parse_experiment_config(stream);
  const double gamma = manifest.at("gamma").get<double>();

  if (config.solver == SolverKind::DetEg) {
    std::cerr << "check: no envelope is claimed for the deterministic baseline\n";
    return 2;
  }
  const FiniteSumVI problem = build_problem(config);
  if (!problem.reference_solution()) {
    std::cerr << "check: problem has no reference solution; run `visolve reference` first\n";
    return 2;
  }

  const BoundKind kind =
      config.solver == SolverKind::VrEg ? BoundKind::VrLinear : BoundKind::EgNeighborhood;
  const double slack =
      slack_override > 0.0 ? slack_override : (kind == BoundKind::VrLinear ? 1.05 : 2.0);

  bool all_pass = true;
  bool any_checked = false;
  for (ScheduleKind schedule : config.schedules) {
    // The envelopes cover the shuffled schedules only.
    if (schedule != ScheduleKind::RandomReshuffling && schedule != ScheduleKind::ShuffleOnce) {
      continue;
    }
    std::vector<RunTrace> traces;
    for (std::uint64_t seed : config.seeds) {
      const fs::path file =
          fs::path(trace_dir) / (to_string(schedule) + "_" + std::to_string(seed) + ".csv");
      if (fs::exists(file)) traces.push_back(read_trace_file(file.string()));
    }
    if (traces.empty()) continue;
    any_checked = true;
    const BoundsReport report = check_theorem_bounds(traces, problem, gamma, kind, slack);
    std::cout << to_string(schedule) << ": " << (report.pass ? "PASS" : "FAIL")
              << " worst mean/bound = " << report.worst_ratio << " at iteration "
              << report.worst_iteration << " (slack " << slack << ", " << report.trace_count
              << " seeds)\n"
              << report.detail;
    all_pass = all_pass && report.pass;
  }
  if (!any_checked) {
    std::cerr << "check: no rr/so traces found in " << trace_dir << "\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}

int cmd_plotdata(const std::string& trace_dir) {
  std::vector<RunTrace> traces;
  for (const auto& entry : fs::directory_iterator(trace_dir)) {
    if (entry.path().extension() == ".csv" &&
        entry.path().filename().string().rfind("plot_", 0) != 0) {
      traces.push_back(read_trace_file(entry.path().string()));
    }
  }
  if (traces.empty()) {
    std::cerr << "plotdata: no trace csv files in " << trace_dir << "\n";
    return 2;
  }
  std::ofstream long_out(fs::path(trace_dir) / "plot_long.csv");
  emit_plot_long(traces, long_out);
  std::ofstream agg_out(fs::path(trace_dir) / "plot_aggregate.csv");
  emit_plot_aggregate(traces, agg_out);
  std::cout << "wrote plot_long.csv and plot_aggregate.csv (" << traces.size()
            << " traces)\n";
  return 0;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

int cmd_fetch(const std::string& name, const std::string& dir) {
  static const std::map<std::string, std::string> paths = {
      {"mushrooms", "/~cjlin/libsvmtools/datasets/binary/mushrooms"},
      {"a9a", "/~cjlin/libsvmtools/datasets/binary/a9a"},
      {"w8a", "/~cjlin/libsvmtools/datasets/binary/w8a"},
  };
  const auto it = paths.find(name);
  if (it == paths.end()) {
    std::cerr << "fetch-data: unknown dataset '" << name << "' (mushrooms, a9a, w8a)\n";
    return 2;
  }
  httplib::SSLClient client("www.csie.ntu.edu.tw");
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  std::cout << "fetching " << name << "...\n";
  const httplib::Result response = client.Get(it->second);
  if (!response || response->status != 200) {
    std::cerr << "fetch-data: download failed"
              << (response ? " (http " + std::to_string(response->status) + ")" : "") << "\n";
    return 2;
  }

  fs::create_directories(dir);
  const fs::path file = fs::path(dir) / (name + ".libsvm");
  const fs::path checksum_file = fs::path(dir) / (name + ".libsvm.sha256");
  const std::string digest = sha256_hex(response->body);

  // Upstream publishes no checksums; the first fetch records one and later
  // fetches verify against it.
  if (fs::exists(checksum_file)) {
    std::ifstream in(checksum_file);
    std::string expected;
    in >> expected;
    if (expected != digest) {
      std::cerr << "fetch-data: checksum mismatch against " << checksum_file << "\n";
      return 2;
    }
  } else {
    std::ofstream out(checksum_file);
    out << digest << "  " << file.filename().string() << "\n";
  }
  std::ofstream out(file, std::ios::binary);
  out << response->body;
  out.close();

  const SparseDataset data = load_libsvm_file(file.string());
  std::cout << file.string() << ": N=" << data.num_rows() << " d=" << data.feature_dim
            << " sha256=" << digest << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-sum variational inequality benchmark runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string trace_dir;
  std::string dataset;
  std::string data_dir = "data";
  double tol = 1e-8;
  double slack = 0.0;

  CLI::App* run = app.add_subcommand("run", "run a schedule x seed experiment sweep");
  run->add_option("config", config_path, "experiment config file")->required();

  CLI::App* reference = app.add_subcommand("reference", "compute a reference solution");
  reference->add_option("config", config_path, "experiment config file")->required();
  reference->add_option("--tol", tol, "target residual (unit prox step)");

  CLI::App* check = app.add_subcommand("check", "check theorem envelopes on traces");
  check->add_option("trace-dir", trace_dir, "directory with traces + manifest")->required();
  check->add_option("--slack", slack, "override the envelope slack factor");

  CLI::App* plot = app.add_subcommand("plotdata", "merge traces into plot-ready csv");
  plot->add_option("trace-dir", trace_dir, "directory with trace csv files")->required();

  CLI::App* fetch = app.add_subcommand("fetch-data", "download a LIBSVM dataset");
  fetch->add_option("name", dataset, "mushrooms | a9a | w8a")->required();
  fetch->add_option("--dir", data_dir, "target directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (reference->parsed()) return cmd_reference(config_path, tol);
    if (check->parsed()) return cmd_check(trace_dir, slack);
    if (plot->parsed()) return cmd_plotdata(trace_dir);
    if (fetch->parsed()) return cmd_fetch(dataset, data_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
