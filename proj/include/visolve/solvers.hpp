// Shuffled extragradient solvers. run_eg is the plain two-prox-step loop
// over S epochs of n component steps; run_vr_eg adds the loopless
// variance-reduced estimator anchored at a probabilistically refreshed
// snapshot; run_deterministic_eg is the full-operator baseline (one
// iteration per epoch, 2n oracle calls each). Default step sizes follow
// the convergence theory for strongly monotone problems.
#pragma once

#include <cstdint>

#include "visolve/problem.hpp"
#include "visolve/schedule.hpp"
#include "visolve/trace.hpp"

namespace visolve {

enum class MetricCadence { EveryIteration, EveryEpoch };

struct StopRule {
  std::int64_t max_oracle_calls = 0;  // 0 = no cap; checked at epoch ends
  double residual_tolerance = 0.0;    // 0 = disabled; checked at epoch ends
};

struct SolverConfig {
  double gamma = 0.0;
  int epochs = 1;
  double alpha = 0.0;          // VR mixing; <=0 means default 1 - 1/n
  double snapshot_prob = 0.0;  // VR refresh probability; <=0 means default 1/n
  MetricCadence cadence = MetricCadence::EveryEpoch;
  std::uint64_t seed = 50;     // drives the VR snapshot coin flips
  StopRule stop;
  Point start;                 // empty = origin
};

// One extragradient step through component i:
//   z_half = prox_{gamma g}(z - gamma F_i(z))
//   z_next = prox_{gamma g}(z - gamma F_i(z_half))
// Exactly two component-oracle calls.
Point eg_step(const FiniteSumVI& problem, const Point& z, int i, double gamma);

RunTrace run_eg(const FiniteSumVI& problem, Schedule& schedule,
                const SolverConfig& config);

struct VRState {
  Point iterate;        // z
  Point snapshot;       // omega
  Point snapshot_full;  // F(omega), cached
  bool cache_valid = false;
};

// One variance-reduced step through component i:
//   zbar   = alpha z + (1 - alpha) omega
//   z_half = prox_{gamma g}(zbar - gamma F(omega))
//   est    = F_i(z_half) - F_i(omega) + F(omega)
//   z_next = prox_{gamma g}(zbar - gamma est)
// then with probability p the snapshot becomes the pre-update iterate z and
// F(omega) is recomputed (n extra calls). Returns the component-oracle
// calls consumed: 2, plus n on refresh.
std::int64_t vr_eg_step(const FiniteSumVI& problem, VRState& state, int i,
                        double gamma, double alpha, double snapshot_prob,
                        rng::Engine& coin);

RunTrace run_vr_eg(const FiniteSumVI& problem, Schedule& schedule,
                   const SolverConfig& config);

// Full-operator extragradient; each "epoch" of the config is one iteration
// costing 2n component calls, so epoch-indexed comparisons against the
// stochastic solvers share an oracle budget.
RunTrace run_deterministic_eg(const FiniteSumVI& problem, const SolverConfig& config);

// gamma = min{1/(2 mu n), 1/(6 L)}.
double default_step_eg(double mu, double lipschitz, int n);

// Three-way minimum including the horizon-tuned term
// 2 log(max{2, mu^2 dist0_sq T / (512 n^2 sigma_sq)}) / (mu T).
double default_step_eg_tuned(double mu, double lipschitz, int n, std::int64_t total_steps,
                             double dist0_sq, double sigma_sq);

// gamma = (1 - alpha) mu / (6 L^2).
double default_step_vr(double mu, double lipschitz, double alpha);

}  // namespace visolve
