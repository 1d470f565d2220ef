// Finite-sum variational inequality problem: n component operators F_i, a
// proximal-friendly regularizer g, and optional analytic constants and
// reference solution. Problems are immutable once assembled and safe to
// share across concurrent solver runs.
#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "visolve/point.hpp"
#include "visolve/prox.hpp"

namespace visolve {

struct ComponentOperator {
  int index = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
};

// Constants of the problem class: L bounds every component's Lipschitz
// modulus, mu their strong monotonicity, sigma_star_sq the squared operator
// norms at the solution. full_lipschitz bounds the mean operator F, which
// can be much smaller than the component-level L; the deterministic
// baseline sizes its step from it.
struct ProblemConstants {
  std::optional<double> lipschitz;
  std::optional<double> strong_monotonicity;
  std::optional<double> sigma_star_sq;
  std::optional<double> full_lipschitz;
  std::string provenance;
};

class FiniteSumVI {
 public:
  FiniteSumVI(std::vector<ComponentOperator> components, Regularizer regularizer,
              Eigen::Index dim, Eigen::Index primal_dim = -1);

  int component_count() const { return static_cast<int>(components_.size()); }
  Eigen::Index dim() const { return dim_; }
  bool has_blocks() const { return primal_dim_ >= 0; }
  Eigen::Index primal_dim() const { return primal_dim_; }

  // Attaches this problem's block structure to a coordinate vector.
  Point make_point(Eigen::VectorXd coords) const;
  Point zero_point() const;

  // F_i(z). Stateless; call counting is the caller's job.
  Point evaluate_component(int i, const Point& z) const;

  // (1/n) sum_i F_i(z), accumulated in ascending component order so the
  // epoch-sum identity over any permutation is an exact float equality.
  Point evaluate_full(const Point& z) const;

  // |z - prox_{gamma g}(z - gamma F(z))|; zero exactly at solutions.
  double natural_residual(const Point& z, double gamma) const;

  const Regularizer& regularizer() const { return regularizer_; }
  Point prox(double gamma, const Point& z) const { return regularizer_.prox(gamma, z); }
  const std::vector<ComponentOperator>& components() const { return components_; }

  ProblemConstants constants;

  // Validates that the candidate's residual is below tol before storing.
  void set_reference_solution(Point z_star, double tol);
  const std::optional<Point>& reference_solution() const { return reference_; }
  double reference_tolerance() const { return reference_tol_; }

 private:
  void check_dim(const Point& z) const;

  std::vector<ComponentOperator> components_;
  Regularizer regularizer_;
  Eigen::Index dim_ = 0;
  Eigen::Index primal_dim_ = -1;
  std::optional<Point> reference_;
  double reference_tol_ = 0.0;
};

struct ConstantEstimates {
  double lipschitz = 0.0;
  double strong_monotonicity = 0.0;
  std::optional<double> sigma_star_sq;
};

// Empirical audit of the problem constants: each sample draws a component
// index and a pair of standard-normal points, then takes the worst-case
// difference ratio (L) and inner-product quotient (mu). sigma_star_sq is
// max(mean_i |F_i(z*)|^2, |F(z*)|^2) and requires a reference solution.
ConstantEstimates estimate_constants(const FiniteSumVI& problem, int samples,
                                     std::uint64_t seed);

}  // namespace visolve
