#include "visolve/grid.hpp"

#include <stdexcept>

namespace visolve {

namespace {

void check_grid(Eigen::Index size, int height, int width, double step,
                Eigen::Index per_pixel) {
  if (height < 2 || width < 2) throw std::invalid_argument("grid: degenerate grid");
  if (step <= 0.0) throw std::invalid_argument("grid: step must be positive");
  if (size != static_cast<Eigen::Index>(height) * width * per_pixel) {
    throw std::invalid_argument("grid: shape mismatch");
  }
}

}  // namespace

Eigen::VectorXd grad_image(const Eigen::VectorXd& u, int height, int width, double step) {
  check_grid(u.size(), height, width, step, 1);
  Eigen::VectorXd field = Eigen::VectorXd::Zero(2 * u.size());
  const double inv_h = 1.0 / step;
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const Eigen::Index pix = static_cast<Eigen::Index>(i) * width + j;
      if (i + 1 < height) field[2 * pix] = (u[pix + width] - u[pix]) * inv_h;
      if (j + 1 < width) field[2 * pix + 1] = (u[pix + 1] - u[pix]) * inv_h;
    }
  }
  return field;
}

Eigen::VectorXd div_field(const Eigen::VectorXd& field, int height, int width, double step) {
  check_grid(field.size(), height, width, step, 2);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(height) * width);
  const double inv_h = 1.0 / step;
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const Eigen::Index pix = static_cast<Eigen::Index>(i) * width + j;
      double acc = 0.0;
      if (i + 1 < height) acc += field[2 * pix];
      if (i > 0) acc -= field[2 * (pix - width)];
      if (j + 1 < width) acc += field[2 * pix + 1];
      if (j > 0) acc -= field[2 * (pix - 1) + 1];
      out[pix] = acc * inv_h;
    }
  }
  return out;
}

}  // namespace visolve
