#include "visolve/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace visolve {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("solver: gamma must be positive");
}

Point starting_point(const FiniteSumVI& problem, const SolverConfig& config) {
  if (config.start.dim() == 0) return problem.zero_point();
  if (config.start.dim() != problem.dim()) {
    throw std::invalid_argument("solver: starting point dimension mismatch");
  }
  return problem.make_point(config.start.coords());
}

struct Recorder {
  const FiniteSumVI& problem;
  const SolverConfig& config;
  RunTrace trace;

  // Metric evaluations here are instrumentation: they do not touch the
  // algorithmic oracle counter.
  void record(int epoch, int step, std::int64_t oracle_calls, const Point& z,
              const Point* omega = nullptr) {
    TraceRecord r;
    r.epoch = epoch;
    r.step = step;
    r.oracle_calls = oracle_calls;
    r.residual = problem.natural_residual(z, config.gamma);
    if (problem.reference_solution()) {
      const Point& z_star = *problem.reference_solution();
      r.sq_dist = sq_distance(z, z_star);
      if (omega != nullptr) r.lyapunov = *r.sq_dist + sq_distance(*omega, z_star);
    }
    trace.records.push_back(r);
  }
};

bool stop_requested(const StopRule& stop, std::int64_t oracle_calls, double residual) {
  if (stop.max_oracle_calls > 0 && oracle_calls >= stop.max_oracle_calls) return true;
  if (stop.residual_tolerance > 0.0 && residual < stop.residual_tolerance) return true;
  return false;
}

}  // namespace

Point eg_step(const FiniteSumVI& problem, const Point& z, int i, double gamma) {
  check_gamma(gamma);
  const Point f_z = problem.evaluate_component(i, z);
  const Point z_half = problem.prox(gamma, z.like(z.coords() - gamma * f_z.coords()));
  const Point f_half = problem.evaluate_component(i, z_half);
  return problem.prox(gamma, z.like(z.coords() - gamma * f_half.coords()));
}

RunTrace run_eg(const FiniteSumVI& problem, Schedule& schedule,
                const SolverConfig& config) {
  check_gamma(config.gamma);
  if (schedule.n() != problem.component_count()) {
    throw std::invalid_argument("run_eg: schedule component count mismatch");
  }
  const int n = problem.component_count();

  Recorder rec{problem, config, {}};
  rec.trace.solver = "eg";
  rec.trace.schedule = to_string(schedule.kind());
  rec.trace.gamma = config.gamma;
  rec.trace.seed = schedule.seed();
  rec.trace.steps_per_epoch = n;

  Point z = starting_point(problem, config);
  std::int64_t oracle_calls = 0;
  rec.record(0, 0, oracle_calls, z);

  for (int s = 0; s < config.epochs; ++s) {
    schedule.begin_epoch(s);
    for (int t = 0; t < n; ++t) {
      const int i = schedule.next_index();
      z = eg_step(problem, z, i, config.gamma);
      oracle_calls += 2;
      if (config.cadence == MetricCadence::EveryIteration) {
        rec.record(s, t + 1, oracle_calls, z);
      }
    }
    if (config.cadence == MetricCadence::EveryEpoch) {
      rec.record(s, n, oracle_calls, z);
    }
    if (stop_requested(config.stop, oracle_calls, rec.trace.records.back().residual)) break;
  }
  rec.trace.final_iterate = z.coords();
  return rec.trace;
}

std::int64_t vr_eg_step(const FiniteSumVI& problem, VRState& state, int i,
                        double gamma, double alpha, double snapshot_prob,
                        rng::Engine& coin) {
  check_gamma(gamma);
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("vr_eg_step: alpha must lie in (0,1)");
  }
  if (!(snapshot_prob > 0.0) || snapshot_prob > 1.0) {
    throw std::invalid_argument("vr_eg_step: snapshot probability must lie in (0,1]");
  }
  if (!state.cache_valid) throw std::logic_error("vr_eg_step: snapshot cache invalid");

  const Point& z = state.iterate;
  const Point& omega = state.snapshot;
  const Eigen::VectorXd zbar = alpha * z.coords() + (1.0 - alpha) * omega.coords();

  const Point z_half =
      problem.prox(gamma, z.like(zbar - gamma * state.snapshot_full.coords()));
  const Eigen::VectorXd estimator = problem.evaluate_component(i, z_half).coords() -
                                    problem.evaluate_component(i, omega).coords() +
                                    state.snapshot_full.coords();
  Point z_next = problem.prox(gamma, z.like(zbar - gamma * estimator));
  std::int64_t calls = 2;

  // Snapshot keeps the pre-update iterate z, refreshed after z_next exists.
  if (rng::uniform01(coin) < snapshot_prob) {
    state.snapshot = z;
    state.snapshot_full = problem.evaluate_full(state.snapshot);
    calls += problem.component_count();
  }
  state.iterate = std::move(z_next);
  return calls;
}

RunTrace run_vr_eg(const FiniteSumVI& problem, Schedule& schedule,
                   const SolverConfig& config) {
  check_gamma(config.gamma);
  if (schedule.n() != problem.component_count()) {
    throw std::invalid_argument("run_vr_eg: schedule component count mismatch");
  }
  const int n = problem.component_count();
  const double p = config.snapshot_prob > 0.0 ? config.snapshot_prob : 1.0 / n;
  const double alpha = config.alpha > 0.0 ? config.alpha : 1.0 - p;
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("run_vr_eg: alpha must lie in (0,1); n = 1 needs an explicit alpha");
  }

  Recorder rec{problem, config, {}};
  rec.trace.solver = "vr-eg";
  rec.trace.schedule = to_string(schedule.kind());
  rec.trace.gamma = config.gamma;
  rec.trace.seed = schedule.seed();
  rec.trace.steps_per_epoch = n;

  VRState state;
  state.iterate = starting_point(problem, config);
  state.snapshot = state.iterate;
  state.snapshot_full = problem.evaluate_full(state.snapshot);
  state.cache_valid = true;
  std::int64_t oracle_calls = n;  // initial snapshot cache

  rng::Engine coin(config.seed);
  rec.record(0, 0, oracle_calls, state.iterate, &state.snapshot);

  for (int s = 0; s < config.epochs; ++s) {
    schedule.begin_epoch(s);
    for (int t = 0; t < n; ++t) {
      const int i = schedule.next_index();
      oracle_calls += vr_eg_step(problem, state, i, config.gamma, alpha, p, coin);
      if (config.cadence == MetricCadence::EveryIteration) {
        rec.record(s, t + 1, oracle_calls, state.iterate, &state.snapshot);
      }
    }
    if (config.cadence == MetricCadence::EveryEpoch) {
      rec.record(s, n, oracle_calls, state.iterate, &state.snapshot);
    }
    if (stop_requested(config.stop, oracle_calls, rec.trace.records.back().residual)) break;
  }
  rec.trace.final_iterate = state.iterate.coords();
  return rec.trace;
}

RunTrace run_deterministic_eg(const FiniteSumVI& problem, const SolverConfig& config) {
  check_gamma(config.gamma);
  const int n = problem.component_count();

  Recorder rec{problem, config, {}};
  rec.trace.solver = "det-eg";
  rec.trace.schedule = "-";
  rec.trace.gamma = config.gamma;
  rec.trace.seed = config.seed;
  rec.trace.steps_per_epoch = 1;

  Point z = starting_point(problem, config);
  std::int64_t oracle_calls = 0;
  rec.record(0, 0, oracle_calls, z);

  for (int s = 0; s < config.epochs; ++s) {
    const Point f_z = problem.evaluate_full(z);
    const Point z_half = problem.prox(config.gamma, z.like(z.coords() - config.gamma * f_z.coords()));
    const Point f_half = problem.evaluate_full(z_half);
    z = problem.prox(config.gamma, z.like(z.coords() - config.gamma * f_half.coords()));
    oracle_calls += 2 * n;
    rec.record(s, 1, oracle_calls, z);
    if (stop_requested(config.stop, oracle_calls, rec.trace.records.back().residual)) break;
  }
  rec.trace.final_iterate = z.coords();
  return rec.trace;
}

double default_step_eg(double mu, double lipschitz, int n) {
  if (!(mu > 0.0) || !(lipschitz > 0.0) || n < 1) {
    throw std::invalid_argument("default_step_eg: constants must be positive");
  }
  return std::min(1.0 / (2.0 * mu * n), 1.0 / (6.0 * lipschitz));
}

double default_step_eg_tuned(double mu, double lipschitz, int n, std::int64_t total_steps,
                             double dist0_sq, double sigma_sq) {
  if (!(mu > 0.0) || !(lipschitz > 0.0) || n < 1 || total_steps < 1 ||
      !(dist0_sq > 0.0) || !(sigma_sq > 0.0)) {
    throw std::invalid_argument("default_step_eg_tuned: inputs must be positive");
  }
  const double t = static_cast<double>(total_steps);
  const double horizon_term =
      2.0 * std::log(std::max(2.0, mu * mu * dist0_sq * t / (512.0 * n * n * sigma_sq))) /
      (mu * t);
  return std::min(default_step_eg(mu, lipschitz, n), horizon_term);
}

double default_step_vr(double mu, double lipschitz, double alpha) {
  if (!(mu > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument("default_step_vr: constants must be positive");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("default_step_vr: alpha must lie in (0,1)");
  }
  return (1.0 - alpha) * mu / (6.0 * lipschitz * lipschitz);
}

}  // namespace visolve
