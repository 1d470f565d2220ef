// Data acquisition: LIBSVM text parsing, PGM image I/O, seeded Gaussian
// noise, and square-block grid partitioning.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace visolve {

struct SparseDataset {
  struct Entry {
    int index = 0;  // 0-based feature index
    double value = 0.0;
  };
  std::vector<std::vector<Entry>> rows;  // strictly increasing indices per row
  std::vector<double> labels;
  int feature_dim = 0;

  int num_rows() const { return static_cast<int>(rows.size()); }
};

struct LibsvmOptions {
  bool map_labels_to_01 = false;        // {-1,+1} -> {0,1}
  std::optional<int> declared_dim;      // lifts feature_dim above the max seen index
};

// Accepts lines `label idx:val idx:val ...` with 1-based indices; text after
// `#` is a comment. Malformed tokens, non-increasing indices and empty input
// are rejected with the offending line number.
SparseDataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
SparseDataset load_libsvm_file(const std::string& path, const LibsvmOptions& options = {});

struct GrayImage {
  int height = 0;
  int width = 0;
  Eigen::VectorXd pixels;  // row-major, nominally in [0,1]

  double& at(int i, int j) { return pixels[static_cast<Eigen::Index>(i) * width + j]; }
  double at(int i, int j) const { return pixels[static_cast<Eigen::Index>(i) * width + j]; }
};

// P2 (ascii) and P5 (binary) portable graymaps, maxval <= 65535; pixel
// values are scaled to [0,1] by 1/maxval.
GrayImage load_pgm(std::istream& in);
GrayImage load_pgm_file(const std::string& path);

// Writes binary P5 with maxval 255; values are clamped to [0,1] first.
void save_pgm(const GrayImage& image, std::ostream& out);
void save_pgm_file(const GrayImage& image, const std::string& path);

// Pixel-wise additive N(0, sigma^2) from the seeded generator; the result
// is not clamped, so noisy values may leave [0,1].
GrayImage add_gaussian_noise(const GrayImage& image, double sigma, std::uint64_t seed);

// Row-major list of disjoint b x b pixel-index blocks covering the grid;
// b must divide both dimensions.
std::vector<std::vector<int>> partition_grid(int height, int width, int block);

// Peak signal-to-noise ratio in dB for [0,1] images.
double psnr(const GrayImage& a, const GrayImage& b);

// Deterministic piecewise-constant test image (flat background with
// rectangles and a disc), the kind of content total variation likes.
GrayImage make_shapes_image(int height, int width);

}  // namespace visolve
