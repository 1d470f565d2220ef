#include "visolve/problem.hpp"

#include <stdexcept>

#include "visolve/rng.hpp"

namespace visolve {

FiniteSumVI::FiniteSumVI(std::vector<ComponentOperator> components,
                         Regularizer regularizer, Eigen::Index dim,
                         Eigen::Index primal_dim)
    : components_(std::move(components)),
      regularizer_(std::move(regularizer)),
      dim_(dim),
      primal_dim_(primal_dim) {
  if (components_.empty()) throw std::invalid_argument("FiniteSumVI: need n >= 1 components");
  if (dim_ <= 0) throw std::invalid_argument("FiniteSumVI: dimension must be positive");
  if (primal_dim_ >= 0 && primal_dim_ > dim_) {
    throw std::invalid_argument("FiniteSumVI: primal block does not fit dimension");
  }
}

Point FiniteSumVI::make_point(Eigen::VectorXd coords) const {
  if (coords.size() != dim_) {
    throw std::invalid_argument("FiniteSumVI::make_point: dimension mismatch");
  }
  return primal_dim_ >= 0 ? Point(std::move(coords), primal_dim_)
                          : Point(std::move(coords));
}

Point FiniteSumVI::zero_point() const {
  return make_point(Eigen::VectorXd::Zero(dim_));
}

void FiniteSumVI::check_dim(const Point& z) const {
  if (z.dim() != dim_) {
    throw std::invalid_argument("FiniteSumVI: point dimension mismatch");
  }
}

Point FiniteSumVI::evaluate_component(int i, const Point& z) const {
  if (i < 0 || i >= component_count()) {
    throw std::out_of_range("evaluate_component: index out of range");
  }
  check_dim(z);
  Eigen::VectorXd out = components_[static_cast<size_t>(i)].eval(z.coords());
  if (out.size() != dim_) {
    throw std::runtime_error("evaluate_component: operator returned wrong dimension");
  }
  return make_point(std::move(out));
}

Point FiniteSumVI::evaluate_full(const Point& z) const {
  check_dim(z);
  Eigen::VectorXd acc = components_[0].eval(z.coords());
  for (int i = 1; i < component_count(); ++i) {
    acc += components_[static_cast<size_t>(i)].eval(z.coords());
  }
  acc /= static_cast<double>(component_count());
  return make_point(std::move(acc));
}

double FiniteSumVI::natural_residual(const Point& z, double gamma) const {
  if (gamma <= 0.0) throw std::invalid_argument("natural_residual: gamma must be positive");
  check_dim(z);
  const Point f = evaluate_full(z);
  const Point mapped = prox(gamma, z.like(z.coords() - gamma * f.coords()));
  return (z.coords() - mapped.coords()).norm();
}

void FiniteSumVI::set_reference_solution(Point z_star, double tol) {
  check_dim(z_star);
  if (tol <= 0.0) throw std::invalid_argument("set_reference_solution: tol must be positive");
  const double res = natural_residual(z_star, 1.0);
  if (res > tol) {
    throw std::invalid_argument("set_reference_solution: candidate residual " +
                                std::to_string(res) + " exceeds tolerance");
  }
  reference_ = std::move(z_star);
  reference_tol_ = tol;
}

ConstantEstimates estimate_constants(const FiniteSumVI& problem, int samples,
                                     std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("estimate_constants: need samples >= 1");
  rng::Engine eng(seed);
  const Eigen::Index d = problem.dim();
  auto draw = [&] {
    Eigen::VectorXd v(d);
    for (Eigen::Index k = 0; k < d; ++k) v[k] = rng::gaussian(eng);
    return problem.make_point(std::move(v));
  };

  ConstantEstimates est;
  est.strong_monotonicity = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const int i = static_cast<int>(
        rng::uniform_below(eng, static_cast<std::uint64_t>(problem.component_count())));
    const Point z1 = draw();
    const Point z2 = draw();
    const Eigen::VectorXd dz = z1.coords() - z2.coords();
    const double dz_sq = dz.squaredNorm();
    if (dz_sq == 0.0) continue;
    const Eigen::VectorXd df = problem.evaluate_component(i, z1).coords() -
                               problem.evaluate_component(i, z2).coords();
    est.lipschitz = std::max(est.lipschitz, df.norm() / std::sqrt(dz_sq));
    est.strong_monotonicity = std::min(est.strong_monotonicity, df.dot(dz) / dz_sq);
  }

  if (problem.reference_solution()) {
    const Point& z_star = *problem.reference_solution();
    double mean_sq = 0.0;
    for (int i = 0; i < problem.component_count(); ++i) {
      mean_sq += problem.evaluate_component(i, z_star).coords().squaredNorm();
    }
    mean_sq /= problem.component_count();
    const double full_sq = problem.evaluate_full(z_star).coords().squaredNorm();
    est.sigma_star_sq = std::max(mean_sq, full_sq);
  }
  return est;
}

}  // namespace visolve
