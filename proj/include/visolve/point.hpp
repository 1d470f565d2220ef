// Dense iterate type shared by all solvers. A point is a flat coordinate
// vector, optionally split into a primal and a dual block for saddle
// problems.
#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace visolve {

class Point {
 public:
  Point() = default;

  explicit Point(Eigen::VectorXd coords) : coords_(std::move(coords)) {}

  // Blocked point: first `primal_dim` coordinates form the primal block,
  // the rest the dual block.
  Point(Eigen::VectorXd coords, Eigen::Index primal_dim)
      : coords_(std::move(coords)), primal_dim_(primal_dim) {
    if (primal_dim_ < 0 || primal_dim_ > coords_.size()) {
      throw std::invalid_argument("Point: primal block does not fit dimension");
    }
  }

  Eigen::Index dim() const { return coords_.size(); }
  bool has_blocks() const { return primal_dim_ >= 0; }

  Eigen::Index primal_dim() const {
    require_blocks();
    return primal_dim_;
  }
  Eigen::Index dual_dim() const {
    require_blocks();
    return coords_.size() - primal_dim_;
  }

  Eigen::VectorXd& coords() { return coords_; }
  const Eigen::VectorXd& coords() const { return coords_; }

  Eigen::Ref<const Eigen::VectorXd> primal() const {
    require_blocks();
    return coords_.head(primal_dim_);
  }
  Eigen::Ref<const Eigen::VectorXd> dual() const {
    require_blocks();
    return coords_.tail(coords_.size() - primal_dim_);
  }
  Eigen::Ref<Eigen::VectorXd> primal() {
    require_blocks();
    return coords_.head(primal_dim_);
  }
  Eigen::Ref<Eigen::VectorXd> dual() {
    require_blocks();
    return coords_.tail(coords_.size() - primal_dim_);
  }

  // New point with the same block structure.
  Point like(Eigen::VectorXd coords) const {
    if (coords.size() != coords_.size()) {
      throw std::invalid_argument("Point::like: dimension mismatch");
    }
    Point p(std::move(coords));
    p.primal_dim_ = primal_dim_;
    return p;
  }

 private:
  void require_blocks() const {
    if (primal_dim_ < 0) throw std::logic_error("Point: no block structure");
  }

  Eigen::VectorXd coords_;
  Eigen::Index primal_dim_ = -1;
};

inline double sq_distance(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("sq_distance: dimension mismatch");
  }
  return (a.coords() - b.coords()).squaredNorm();
}

}  // namespace visolve
