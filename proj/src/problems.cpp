#include "visolve/problems.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <memory>
#include <stdexcept>

#include "visolve/grid.hpp"
#include "visolve/rng.hpp"

namespace visolve {

namespace {

Eigen::MatrixXd random_gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                       rng::Engine& eng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng::gaussian(eng);
  }
  return m;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  return m.jacobiSvd().singularValues()[0];
}

}  // namespace

FiniteSumVI make_affine_saddle(const AffineSaddleSpec& spec) {
  const Eigen::Index d = spec.dimension;
  const int n = spec.components;
  if (d < 1 || n < 1) throw std::invalid_argument("make_affine_saddle: need d, n >= 1");
  if (!(spec.mu > 0.0) || spec.mu > spec.lipschitz) {
    throw std::invalid_argument("make_affine_saddle: need 0 < mu <= L");
  }

  rng::Engine eng(spec.seed);
  std::vector<Eigen::MatrixXd> mats;
  std::vector<Eigen::VectorXd> offsets;
  mats.reserve(static_cast<size_t>(n));
  offsets.reserve(static_cast<size_t>(n));

  for (int i = 0; i < n; ++i) {
    // Symmetric PSD part with smallest eigenvalue exactly zero, so the
    // strong-monotonicity modulus of mu I + t S stays mu for every t.
    const Eigen::MatrixXd basis =
        Eigen::HouseholderQR<Eigen::MatrixXd>(random_gaussian_matrix(d, d, eng))
            .householderQ();
    Eigen::VectorXd eigs(d);
    for (Eigen::Index k = 0; k < d; ++k) eigs[k] = rng::uniform01(eng);
    eigs.array() -= eigs.minCoeff();
    const Eigen::MatrixXd sym_part = basis * eigs.asDiagonal() * basis.transpose();
    const Eigen::MatrixXd raw = random_gaussian_matrix(d, d, eng);
    const Eigen::MatrixXd antisym_part = 0.5 * (raw - raw.transpose());

    Eigen::MatrixXd mat;
    if (d == 1 || spec.lipschitz == spec.mu) {
      mat = spec.mu * Eigen::MatrixXd::Identity(d, d);
    } else {
      // |mu I + t (S + A)|_2 is convex, equals mu at t = 0 and grows without
      // bound; bisect for the t hitting L from below.
      const Eigen::MatrixXd direction = sym_part + antisym_part;
      auto norm_at = [&](double t) {
        return spectral_norm(spec.mu * Eigen::MatrixXd::Identity(d, d) + t * direction);
      };
      double hi = 1.0;
      while (norm_at(hi) < spec.lipschitz) hi *= 2.0;
      double lo = 0.0;
      for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (norm_at(mid) <= spec.lipschitz ? lo : hi) = mid;
      }
      mat = spec.mu * Eigen::MatrixXd::Identity(d, d) + lo * direction;
    }
    mats.push_back(std::move(mat));

    Eigen::VectorXd c(d);
    for (Eigen::Index k = 0; k < d; ++k) c[k] = rng::gaussian(eng);
    offsets.push_back(std::move(c));
  }

  Eigen::MatrixXd mean_mat = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd mean_offset = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    mean_mat += mats[static_cast<size_t>(i)];
    mean_offset += offsets[static_cast<size_t>(i)];
  }
  mean_mat /= n;
  mean_offset /= n;

  const Eigen::VectorXd z_star = mean_mat.partialPivLu().solve(-mean_offset);
  if ((mean_mat * z_star + mean_offset).norm() > 1e-8 * (1.0 + mean_offset.norm())) {
    throw std::runtime_error("make_affine_saddle: mean matrix is numerically singular");
  }

  std::vector<ComponentOperator> components;
  components.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto mat = std::make_shared<const Eigen::MatrixXd>(std::move(mats[static_cast<size_t>(i)]));
    auto off = std::make_shared<const Eigen::VectorXd>(std::move(offsets[static_cast<size_t>(i)]));
    components.push_back(
        {i, [mat, off](const Eigen::VectorXd& z) -> Eigen::VectorXd { return (*mat) * z + *off; }});
  }

  FiniteSumVI problem(std::move(components), Regularizer::zero(), d);
  problem.constants.lipschitz = spec.lipschitz;
  problem.constants.strong_monotonicity = spec.mu;
  problem.constants.full_lipschitz = spectral_norm(mean_mat);
  problem.constants.provenance = "analytic (spectral construction)";

  double sigma_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    sigma_sq += problem.evaluate_component(i, problem.make_point(z_star)).coords().squaredNorm();
  }
  sigma_sq /= n;
  const double full_sq = problem.evaluate_full(problem.make_point(z_star)).coords().squaredNorm();
  problem.constants.sigma_star_sq = std::max(sigma_sq, full_sq);

  problem.set_reference_solution(problem.make_point(z_star), 1e-8);
  return problem;
}

// ---------------------------------------------------------------------------
// Denoising

namespace {

struct DenoisingData {
  Eigen::VectorXd noisy;
  double lambda = 0.0;
  double step = 1.0;
  int height = 0;
  int width = 0;
  int batch = 0;
  int n = 0;
};

void check_denoising(const DenoisingSpec& spec) {
  if (spec.batch != 4 && spec.batch != 8) {
    throw std::invalid_argument("denoising: batch side must be 4 or 8");
  }
  if (spec.noisy.height % spec.batch != 0 || spec.noisy.width % spec.batch != 0) {
    throw std::invalid_argument("denoising: batch side must divide the image");
  }
  if (!(spec.lambda > 0.0)) throw std::invalid_argument("denoising: lambda must be positive");
  if (!(spec.grid_step > 0.0)) throw std::invalid_argument("denoising: grid step must be positive");
  if (spec.noisy.pixels.size() !=
      static_cast<Eigen::Index>(spec.noisy.height) * spec.noisy.width) {
    throw std::invalid_argument("denoising: malformed image");
  }
}

// Batch-local operator values for the b x b block at (row0, col0), written
// into the global output with the component scale n.
void denoising_batch_eval(const DenoisingData& data, int row0, int col0,
                          const Eigen::VectorXd& z, Eigen::VectorXd& out) {
  const int b = data.batch;
  const Eigen::Index pixels = static_cast<Eigen::Index>(data.height) * data.width;
  Eigen::VectorXd u_loc(static_cast<Eigen::Index>(b) * b);
  Eigen::VectorXd p_loc(2 * static_cast<Eigen::Index>(b) * b);
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j) {
      const Eigen::Index pix = static_cast<Eigen::Index>(row0 + i) * data.width + (col0 + j);
      const Eigen::Index loc = static_cast<Eigen::Index>(i) * b + j;
      u_loc[loc] = z[pix];
      p_loc[2 * loc] = z[pixels + 2 * pix];
      p_loc[2 * loc + 1] = z[pixels + 2 * pix + 1];
    }
  }
  const Eigen::VectorXd grad_loc = grad_image(u_loc, b, b, data.step);
  const Eigen::VectorXd div_loc = div_field(p_loc, b, b, data.step);
  const double scale = static_cast<double>(data.n);
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j) {
      const Eigen::Index pix = static_cast<Eigen::Index>(row0 + i) * data.width + (col0 + j);
      const Eigen::Index loc = static_cast<Eigen::Index>(i) * b + j;
      out[pix] = scale * (-div_loc[loc] + data.lambda * (u_loc[loc] - data.noisy[pix]));
      out[pixels + 2 * pix] = scale * (-grad_loc[2 * loc]);
      out[pixels + 2 * pix + 1] = scale * (-grad_loc[2 * loc + 1]);
    }
  }
}

}  // namespace

FiniteSumVI make_denoising(const DenoisingSpec& spec) {
  check_denoising(spec);
  const int height = spec.noisy.height;
  const int width = spec.noisy.width;
  const int b = spec.batch;
  const int n = (height / b) * (width / b);
  const Eigen::Index pixels = static_cast<Eigen::Index>(height) * width;

  auto data = std::make_shared<const DenoisingData>(DenoisingData{
      spec.noisy.pixels, spec.lambda, spec.grid_step, height, width, b, n});

  std::vector<ComponentOperator> components;
  components.reserve(static_cast<size_t>(n));
  int index = 0;
  for (int bi = 0; bi < height / b; ++bi) {
    for (int bj = 0; bj < width / b; ++bj) {
      const int row0 = bi * b;
      const int col0 = bj * b;
      components.push_back({index++, [data, row0, col0](const Eigen::VectorXd& z) {
                              Eigen::VectorXd out = Eigen::VectorXd::Zero(z.size());
                              denoising_batch_eval(*data, row0, col0, z, out);
                              return out;
                            }});
    }
  }

  FiniteSumVI problem(std::move(components),
                      Regularizer::product(Regularizer::zero(),
                                           Regularizer::ball_indicator(1.0, 2)),
                      3 * pixels, pixels);
  // |grad|_2 <= sqrt(8)/h, so the full operator's modulus is at most
  // sqrt(lambda^2 + 8/h^2); each component scales it by n.
  const double full_bound =
      std::sqrt(spec.lambda * spec.lambda + 8.0 / (spec.grid_step * spec.grid_step));
  problem.constants.full_lipschitz = full_bound;
  problem.constants.lipschitz = n * full_bound;
  problem.constants.strong_monotonicity = 0.0;
  problem.constants.provenance = "analytic bound (grid operator norm)";
  return problem;
}

double denoising_smooth_objective(const DenoisingSpec& spec, const Point& z) {
  check_denoising(spec);
  const int height = spec.noisy.height;
  const int width = spec.noisy.width;
  const int b = spec.batch;
  const Eigen::Index pixels = static_cast<Eigen::Index>(height) * width;
  if (z.dim() != 3 * pixels) throw std::invalid_argument("denoising objective: dimension mismatch");

  double coupling = 0.0;
  for (int bi = 0; bi < height / b; ++bi) {
    for (int bj = 0; bj < width / b; ++bj) {
      Eigen::VectorXd u_loc(static_cast<Eigen::Index>(b) * b);
      Eigen::VectorXd p_loc(2 * static_cast<Eigen::Index>(b) * b);
      for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
          const Eigen::Index pix =
              static_cast<Eigen::Index>(bi * b + i) * width + (bj * b + j);
          const Eigen::Index loc = static_cast<Eigen::Index>(i) * b + j;
          u_loc[loc] = z.coords()[pix];
          p_loc[2 * loc] = z.coords()[pixels + 2 * pix];
          p_loc[2 * loc + 1] = z.coords()[pixels + 2 * pix + 1];
        }
      }
      coupling += grad_image(u_loc, b, b, spec.grid_step).dot(p_loc);
    }
  }
  const double data_term =
      0.5 * spec.lambda * (z.coords().head(pixels) - spec.noisy.pixels).squaredNorm();
  return coupling + data_term;
}

Eigen::VectorXd denoising_monolithic_operator(const DenoisingSpec& spec, const Point& z) {
  const int height = spec.noisy.height;
  const int width = spec.noisy.width;
  const Eigen::Index pixels = static_cast<Eigen::Index>(height) * width;
  if (z.dim() != 3 * pixels) throw std::invalid_argument("denoising operator: dimension mismatch");
  const Eigen::VectorXd u = z.coords().head(pixels);
  const Eigen::VectorXd p = z.coords().tail(2 * pixels);
  Eigen::VectorXd out(3 * pixels);
  out.head(pixels) = -div_field(p, height, width, spec.grid_step) +
                     spec.lambda * (u - spec.noisy.pixels);
  out.tail(2 * pixels) = -grad_image(u, height, width, spec.grid_step);
  return out;
}

std::vector<int> denoising_interior_pixels(const DenoisingSpec& spec) {
  check_denoising(spec);
  const int b = spec.batch;
  std::vector<int> interior;
  for (int i = 0; i < spec.noisy.height; ++i) {
    for (int j = 0; j < spec.noisy.width; ++j) {
      const int li = i % b;
      const int lj = j % b;
      if (li >= 1 && li <= b - 2 && lj >= 1 && lj <= b - 2) {
        interior.push_back(i * spec.noisy.width + j);
      }
    }
  }
  return interior;
}

// ---------------------------------------------------------------------------
// Adversarial training

namespace {

struct AdversarialData {
  Eigen::SparseMatrix<double, Eigen::RowMajor> features;  // N x d
  Eigen::VectorXd targets;
  double lambda = 0.0;
  double beta = 0.0;
  int batch_size = 0;
  int n = 0;

  int samples() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

std::shared_ptr<const AdversarialData> build_adversarial_data(const AdversarialSpec& spec) {
  const int samples = spec.data.num_rows();
  const int dim = spec.data.feature_dim;
  if (samples < 1 || dim < 1) throw std::invalid_argument("adversarial: empty dataset");
  if (spec.batch_size < 1 || spec.batch_size > samples) {
    throw std::invalid_argument("adversarial: batch size must lie in [1, N]");
  }
  if (!(spec.lambda > 0.0) || !(spec.beta > 0.0) || !(spec.radius > 0.0)) {
    throw std::invalid_argument("adversarial: lambda, beta, radius must be positive");
  }

  AdversarialData data;
  data.features.resize(samples, dim);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int r = 0; r < samples; ++r) {
    for (const auto& entry : spec.data.rows[static_cast<size_t>(r)]) {
      triplets.emplace_back(r, entry.index, entry.value);
    }
  }
  data.features.setFromTriplets(triplets.begin(), triplets.end());
  data.targets = Eigen::Map<const Eigen::VectorXd>(spec.data.labels.data(), samples);
  data.lambda = spec.lambda;
  data.beta = spec.beta;
  data.batch_size = spec.batch_size;
  data.n = (samples + spec.batch_size - 1) / spec.batch_size;
  return std::make_shared<const AdversarialData>(std::move(data));
}

// Component over samples [first, last): primal (n/N) sum_j e_j (x_j + r_j)
// + lambda w; dual rows -(n/N) e_j w + n beta r_j for batch samples. The
// n-scaled beta term appears only in the owning component, so the component
// mean reproduces the full operator exactly for any batch split.
void adversarial_batch_eval(const AdversarialData& data, int first, int last,
                            const Eigen::VectorXd& z, Eigen::VectorXd& out) {
  const int dim = data.dim();
  const int samples = data.samples();
  const auto w = z.head(dim);
  const double batch_scale = static_cast<double>(data.n) / samples;

  auto primal_out = out.head(dim);
  primal_out = data.lambda * w;
  for (int j = first; j < last; ++j) {
    const auto r_j = z.segment(dim + static_cast<Eigen::Index>(j) * dim, dim);
    double err = data.features.row(j).dot(w) + w.dot(r_j) - data.targets[j];
    primal_out += (batch_scale * err) * r_j;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(data.features, j);
         it; ++it) {
      primal_out[it.col()] += batch_scale * err * it.value();
    }
    out.segment(dim + static_cast<Eigen::Index>(j) * dim, dim) =
        -(batch_scale * err) * w + (data.n * data.beta) * r_j;
  }
}

}  // namespace

FiniteSumVI make_adversarial(const AdversarialSpec& spec) {
  auto data = build_adversarial_data(spec);
  const int dim = data->dim();
  const int samples = data->samples();
  const Eigen::Index total = dim + static_cast<Eigen::Index>(samples) * dim;

  std::vector<ComponentOperator> components;
  components.reserve(static_cast<size_t>(data->n));
  for (int i = 0; i < data->n; ++i) {
    const int first = i * spec.batch_size;
    const int last = std::min(samples, first + spec.batch_size);
    components.push_back({i, [data, first, last](const Eigen::VectorXd& z) {
                            Eigen::VectorXd out = Eigen::VectorXd::Zero(z.size());
                            adversarial_batch_eval(*data, first, last, z, out);
                            return out;
                          }});
  }

  FiniteSumVI problem(std::move(components),
                      Regularizer::product(Regularizer::zero(),
                                           Regularizer::ball_indicator(spec.radius, dim)),
                      total, dim);

  // The dual block is strongly concave only when beta dominates the data
  // curvature, and the paper leaves beta unspecified; audit empirically.
  const ConstantEstimates audit =
      estimate_constants(problem, spec.audit_samples, spec.audit_seed);
  problem.constants.lipschitz = audit.lipschitz;
  problem.constants.strong_monotonicity = std::max(0.0, audit.strong_monotonicity);
  problem.constants.provenance =
      "estimated (" + std::to_string(spec.audit_samples) + " samples)";
  if (audit.strong_monotonicity <= 0.0) {
    problem.constants.provenance +=
        "; warning: sampled monotonicity quotient <= 0, increase beta for strong monotonicity";
  }
  return problem;
}

double adversarial_smooth_objective(const AdversarialSpec& spec, const Point& z) {
  auto data = build_adversarial_data(spec);
  const int dim = data->dim();
  const int samples = data->samples();
  if (z.dim() != dim + static_cast<Eigen::Index>(samples) * dim) {
    throw std::invalid_argument("adversarial objective: dimension mismatch");
  }
  const auto w = z.coords().head(dim);
  double loss = 0.0;
  double r_sq = 0.0;
  for (int j = 0; j < samples; ++j) {
    const auto r_j = z.coords().segment(dim + static_cast<Eigen::Index>(j) * dim, dim);
    const double err = data->features.row(j).dot(w) + w.dot(r_j) - data->targets[j];
    loss += err * err;
    r_sq += r_j.squaredNorm();
  }
  return loss / (2.0 * samples) + 0.5 * data->lambda * w.squaredNorm() -
         0.5 * data->beta * r_sq;
}

SparseDataset make_synthetic_regression(int samples, int features, std::uint64_t seed) {
  if (samples < 1 || features < 1) {
    throw std::invalid_argument("make_synthetic_regression: need samples, features >= 1");
  }
  rng::Engine eng(seed);
  Eigen::VectorXd planted(features);
  for (int k = 0; k < features; ++k) planted[k] = rng::gaussian(eng) / std::sqrt(features);

  SparseDataset data;
  data.feature_dim = features;
  data.rows.reserve(static_cast<size_t>(samples));
  data.labels.reserve(static_cast<size_t>(samples));
  for (int r = 0; r < samples; ++r) {
    std::vector<SparseDataset::Entry> row;
    row.reserve(static_cast<size_t>(features));
    double dot = 0.0;
    for (int k = 0; k < features; ++k) {
      const double value = rng::gaussian(eng);
      row.push_back({k, value});
      dot += value * planted[k];
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(dot + 0.1 * rng::gaussian(eng));
  }
  return data;
}

// ---------------------------------------------------------------------------

FiniteSumVI regularize_operator(const FiniteSumVI& problem, double mu_reg,
                                const Point& anchor) {
  if (!(mu_reg > 0.0)) throw std::invalid_argument("regularize_operator: mu_reg must be positive");
  if (anchor.dim() != problem.dim()) {
    throw std::invalid_argument("regularize_operator: anchor dimension mismatch");
  }
  auto anchor_coords = std::make_shared<const Eigen::VectorXd>(anchor.coords());

  std::vector<ComponentOperator> components;
  components.reserve(problem.components().size());
  for (const ComponentOperator& base : problem.components()) {
    auto inner = base.eval;
    components.push_back({base.index, [inner, mu_reg, anchor_coords](const Eigen::VectorXd& z) {
                            return Eigen::VectorXd(inner(z) + mu_reg * (z - *anchor_coords));
                          }});
  }

  FiniteSumVI wrapped(std::move(components), problem.regularizer(), problem.dim(),
                      problem.has_blocks() ? problem.primal_dim() : -1);
  const auto& base_constants = problem.constants;
  wrapped.constants.strong_monotonicity =
      base_constants.strong_monotonicity.value_or(0.0) + mu_reg;
  if (base_constants.lipschitz) wrapped.constants.lipschitz = *base_constants.lipschitz + mu_reg;
  if (base_constants.full_lipschitz) {
    wrapped.constants.full_lipschitz = *base_constants.full_lipschitz + mu_reg;
  }
  wrapped.constants.provenance = base_constants.provenance + "; +mu_reg shift";
  // sigma and the reference solution belong to the unshifted problem.
  return wrapped;
}

}  // namespace visolve

