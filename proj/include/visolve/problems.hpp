// Builders for the three benchmark problem families, each yielding a
// FiniteSumVI whose component mean equals the full operator exactly, plus
// the regularization wrapper that adds mu (z - z0) to every component.
#pragma once

#include <cstdint>

#include "visolve/ingest.hpp"
#include "visolve/problem.hpp"

namespace visolve {

// ---------------------------------------------------------------------------
// Synthetic affine saddle: F_i(z) = M_i z + c_i with sym(M_i) >= mu I and
// |M_i|_2 = L exactly, so the stored constants are tight. g == 0 and the
// solution solves mean(M_i) z = -mean(c_i).

struct AffineSaddleSpec {
  Eigen::Index dimension = 2;
  int components = 1;
  double mu = 1.0;
  double lipschitz = 1.0;
  std::uint64_t seed = 0;
};

FiniteSumVI make_affine_saddle(const AffineSaddleSpec& spec);

// ---------------------------------------------------------------------------
// Total-variation denoising saddle over z = (u, p): the smooth operator is
// [-div p + lambda (u - g); -grad u] and the regularizer constrains each
// per-pixel dual 2-vector to the unit ball. Components cover the b x b
// pixel batches of the grid; gradients and divergences inside a batch use
// the batch-local replicate edge rule, so the component mean reproduces the
// whole-image operator except at batch borders.

struct DenoisingSpec {
  GrayImage noisy;
  double lambda = 8.0;   // data-term weight
  int batch = 8;         // batch side, 4 or 8
  double grid_step = 1.0;
};

FiniteSumVI make_denoising(const DenoisingSpec& spec);

// Smooth part of the batched saddle objective:
// sum_batches <grad u, p>_batch + lambda/2 |u - g|^2. Its primal gradient
// and negated dual gradient reproduce the finite-sum operator exactly.
double denoising_smooth_objective(const DenoisingSpec& spec, const Point& z);

// Whole-image operator without batching; the oracle the batched mean is
// compared against on batch-interior pixels.
Eigen::VectorXd denoising_monolithic_operator(const DenoisingSpec& spec, const Point& z);

// Batch-interior pixel indices: pixels whose batch-local stencil never
// touches the batch border, where batched and monolithic operators agree.
std::vector<int> denoising_interior_pixels(const DenoisingSpec& spec);

// ---------------------------------------------------------------------------
// Adversarial least squares over z = (w, r_1..r_N): the smooth operator of
//   min_w max_{|r_i| <= D} 1/(2N) sum_i (w'(x_i+r_i) - y_i)^2
//                           + lambda/2 |w|^2 - beta/2 |r|^2
// with per-sample ball constraints in the regularizer. Components are
// contiguous sample mini-batches, scaled so their mean is the full
// operator for any batch size.

struct AdversarialSpec {
  SparseDataset data;
  double lambda = 0.1;
  double beta = 1.0;
  double radius = 1.0;  // per-sample perturbation bound D
  int batch_size = 4;
  int audit_samples = 12;     // size of the construction-time constants audit
  std::uint64_t audit_seed = 1;
};

FiniteSumVI make_adversarial(const AdversarialSpec& spec);

double adversarial_smooth_objective(const AdversarialSpec& spec, const Point& z);

// Random dense regression data for desk-scale adversarial experiments:
// gaussian features, targets from a planted weight vector plus noise.
SparseDataset make_synthetic_regression(int samples, int features, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Regularization trick: every component becomes F_i(z) + mu_reg (z - anchor),
// buying strong monotonicity at the cost of shifting the solution toward the
// anchor. Stored mu and L grow by mu_reg; sigma and the reference solution
// are invalidated.
FiniteSumVI regularize_operator(const FiniteSumVI& problem, double mu_reg,
                                const Point& anchor);

}  // namespace visolve
