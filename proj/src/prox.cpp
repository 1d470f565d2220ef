#include "visolve/prox.hpp"

#include <stdexcept>

namespace visolve {

Regularizer Regularizer::zero() { return Regularizer(); }

Regularizer Regularizer::sq_distance(double lambda, Eigen::VectorXd anchor) {
  if (lambda <= 0.0) throw std::invalid_argument("sq_distance: lambda must be positive");
  Regularizer g;
  g.kind_ = Kind::SqDistance;
  g.lambda_ = lambda;
  g.anchor_ = std::move(anchor);
  return g;
}

Regularizer Regularizer::ball_indicator(double radius, Eigen::Index sub_dim) {
  if (radius <= 0.0) throw std::invalid_argument("ball_indicator: radius must be positive");
  if (sub_dim <= 0) throw std::invalid_argument("ball_indicator: sub_dim must be positive");
  Regularizer g;
  g.kind_ = Kind::BallIndicator;
  g.radius_ = radius;
  g.sub_dim_ = sub_dim;
  return g;
}

Regularizer Regularizer::product(Regularizer primal, Regularizer dual) {
  Regularizer g;
  g.kind_ = Kind::Product;
  g.primal_part_ = std::make_shared<const Regularizer>(std::move(primal));
  g.dual_part_ = std::make_shared<const Regularizer>(std::move(dual));
  return g;
}

Eigen::VectorXd project_balls(double radius, Eigen::Index sub_dim,
                              const Eigen::VectorXd& z) {
  if (sub_dim <= 0 || z.size() % sub_dim != 0) {
    throw std::invalid_argument("project_balls: vector length not a multiple of sub_dim");
  }
  Eigen::VectorXd out = z;
  for (Eigen::Index k = 0; k < z.size(); k += sub_dim) {
    const double norm = out.segment(k, sub_dim).norm();
    // The rounding band keeps already-projected sub-vectors untouched, so
    // projecting twice is exactly projecting once.
    if (norm > radius * (1.0 + 1e-15)) {
      out.segment(k, sub_dim) *= radius / norm;
    }
  }
  return out;
}

double Regularizer::value_vec(const Eigen::VectorXd& z) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::SqDistance: {
      if (z.size() != anchor_.size()) {
        throw std::invalid_argument("sq_distance regularizer: dimension mismatch");
      }
      return 0.5 * lambda_ * (z - anchor_).squaredNorm();
    }
    case Kind::BallIndicator: {
      if (z.size() % sub_dim_ != 0) {
        throw std::invalid_argument("ball indicator: malformed block structure");
      }
      for (Eigen::Index k = 0; k < z.size(); k += sub_dim_) {
        // Tiny slack so that projected points evaluate as feasible.
        if (z.segment(k, sub_dim_).norm() > radius_ * (1.0 + 1e-12)) {
          return std::numeric_limits<double>::infinity();
        }
      }
      return 0.0;
    }
    case Kind::Product:
      throw std::logic_error("product regularizer requires a blocked point");
  }
  return 0.0;
}

Eigen::VectorXd Regularizer::prox_vec(double gamma, const Eigen::VectorXd& z) const {
  if (gamma <= 0.0) throw std::invalid_argument("prox: gamma must be positive");
  switch (kind_) {
    case Kind::Zero:
      return z;
    case Kind::SqDistance: {
      if (z.size() != anchor_.size()) {
        throw std::invalid_argument("sq_distance regularizer: dimension mismatch");
      }
      // Closed form of argmin_y lambda/2 |y-a|^2 + |y-z|^2 / (2 gamma).
      return (z + gamma * lambda_ * anchor_) / (1.0 + gamma * lambda_);
    }
    case Kind::BallIndicator:
      return project_balls(radius_, sub_dim_, z);
    case Kind::Product:
      throw std::logic_error("product regularizer requires a blocked point");
  }
  return z;
}

double Regularizer::value(const Point& z) const {
  if (kind_ != Kind::Product) return value_vec(z.coords());
  if (!z.has_blocks()) {
    throw std::invalid_argument("product regularizer: point has no block structure");
  }
  return primal_part_->value_vec(z.primal()) + dual_part_->value_vec(z.dual());
}

Point Regularizer::prox(double gamma, const Point& z) const {
  if (kind_ != Kind::Product) return z.like(prox_vec(gamma, z.coords()));
  if (!z.has_blocks()) {
    throw std::invalid_argument("product regularizer: point has no block structure");
  }
  Eigen::VectorXd out(z.dim());
  out.head(z.primal_dim()) = primal_part_->prox_vec(gamma, z.primal());
  out.tail(z.dual_dim()) = dual_part_->prox_vec(gamma, z.dual());
  return z.like(std::move(out));
}

}  // namespace visolve
