// Discrete image calculus. Images are row-major H x W vectors; gradient
// fields carry two channels per pixel, interleaved as
// field[2*(i*W + j) + c] with c = 0 vertical, c = 1 horizontal.
#pragma once

#include <Eigen/Core>

namespace visolve {

// Forward differences normalized by the grid step; differences across the
// last row/column are zero (the missing neighbor replicates the edge
// pixel). Throws for grids smaller than 2 x 2.
Eigen::VectorXd grad_image(const Eigen::VectorXd& u, int height, int width, double step);

// Negative adjoint of grad_image: <grad u, p> = -<u, div p> exactly, for
// every u and p on the same grid.
Eigen::VectorXd div_field(const Eigen::VectorXd& field, int height, int width, double step);

}  // namespace visolve
