// Catalog of proximal-friendly regularizers: the identity (g == 0), a
// quadratic distance to an anchor, indicator functions of Euclidean balls
// applied block-wise, and a primal/dual product of the above.
#pragma once

#include <Eigen/Core>

#include <limits>
#include <memory>

#include "visolve/point.hpp"

namespace visolve {

class Regularizer {
 public:
  enum class Kind { Zero, SqDistance, BallIndicator, Product };

  // g == 0; prox is the identity.
  static Regularizer zero();

  // g(z) = lambda/2 * |z - anchor|^2.
  static Regularizer sq_distance(double lambda, Eigen::VectorXd anchor);

  // Indicator of {z : |z_k| <= radius for every sub-vector z_k}, where the
  // vector is partitioned into contiguous sub-vectors of length `sub_dim`
  // (2 for per-pixel dual fields, the feature dimension for per-sample
  // perturbations). prox is the block-wise projection.
  static Regularizer ball_indicator(double radius, Eigen::Index sub_dim);

  // Block-separable g(x, y) = g1(x) + g2(y) over a blocked point.
  static Regularizer product(Regularizer primal, Regularizer dual);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }

  // Extended-real value; +inf outside a ball indicator's feasible set.
  double value(const Point& z) const;

  // argmin_y g(y) + |y - z|^2 / (2 gamma).
  Point prox(double gamma, const Point& z) const;

  // Raw-vector versions used internally and by the product composition.
  double value_vec(const Eigen::VectorXd& z) const;
  Eigen::VectorXd prox_vec(double gamma, const Eigen::VectorXd& z) const;

 private:
  Regularizer() = default;

  Kind kind_ = Kind::Zero;
  double lambda_ = 0.0;
  Eigen::VectorXd anchor_;
  double radius_ = 0.0;
  Eigen::Index sub_dim_ = 0;
  std::shared_ptr<const Regularizer> primal_part_;
  std::shared_ptr<const Regularizer> dual_part_;
};

// Block-wise projection onto Euclidean balls: every contiguous sub-vector v
// of length sub_dim becomes v * min(1, radius/|v|); zero sub-vectors are
// left unchanged.
Eigen::VectorXd project_balls(double radius, Eigen::Index sub_dim,
                              const Eigen::VectorXd& z);

}  // namespace visolve
