#include "visolve/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "visolve/rng.hpp"

namespace visolve {

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw std::runtime_error("libsvm parse error at line " + std::to_string(line_no) +
                           ": " + what);
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  SparseDataset data;
  std::string line;
  int line_no = 0;
  int max_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string label_token;
    if (!(tokens >> label_token)) continue;  // blank or comment-only line

    double label;
    try {
      size_t used = 0;
      label = std::stod(label_token, &used);
      if (used != label_token.size()) parse_fail(line_no, "bad label '" + label_token + "'");
    } catch (const std::logic_error&) {
      parse_fail(line_no, "bad label '" + label_token + "'");
    }
    if (options.map_labels_to_01) {
      if (label == -1.0) label = 0.0;
      else if (label == 1.0) label = 1.0;
    }

    std::vector<SparseDataset::Entry> row;
    std::string pair;
    int prev_index = -1;
    while (tokens >> pair) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size()) {
        parse_fail(line_no, "bad feature token '" + pair + "'");
      }
      int index;
      double value;
      try {
        size_t used = 0;
        index = std::stoi(pair.substr(0, colon), &used);
        if (used != colon) parse_fail(line_no, "bad feature index in '" + pair + "'");
        used = 0;
        const std::string value_str = pair.substr(colon + 1);
        value = std::stod(value_str, &used);
        if (used != value_str.size()) parse_fail(line_no, "bad feature value in '" + pair + "'");
      } catch (const std::logic_error&) {
        parse_fail(line_no, "bad feature token '" + pair + "'");
      }
      if (index < 1) parse_fail(line_no, "feature indices are 1-based");
      if (index - 1 <= prev_index) parse_fail(line_no, "feature indices must increase");
      prev_index = index - 1;
      row.push_back({index - 1, value});
    }
    max_index = std::max(max_index, prev_index);
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  if (data.rows.empty()) parse_fail(line_no, "no samples");
  data.feature_dim = max_index + 1;
  if (options.declared_dim) data.feature_dim = std::max(data.feature_dim, *options.declared_dim);
  return data;
}

SparseDataset load_libsvm_file(const std::string& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return parse_libsvm(in, options);
}

namespace {

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  if (token.empty()) throw std::runtime_error("pgm: truncated header");
  return token;
}

int pgm_int(std::istream& in) {
  const std::string token = pgm_token(in);
  size_t used = 0;
  const int v = std::stoi(token, &used);
  if (used != token.size()) throw std::runtime_error("pgm: bad header token '" + token + "'");
  return v;
}

}  // namespace

GrayImage load_pgm(std::istream& in) {
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw std::runtime_error("pgm: bad magic '" + magic + "'");
  const int width = pgm_int(in);
  const int height = pgm_int(in);
  const int maxval = pgm_int(in);
  if (width < 1 || height < 1) throw std::runtime_error("pgm: bad dimensions");
  if (maxval < 1 || maxval > 65535) throw std::runtime_error("pgm: unsupported maxval");

  GrayImage image;
  image.height = height;
  image.width = width;
  image.pixels.resize(static_cast<Eigen::Index>(height) * width);
  const Eigen::Index count = image.pixels.size();
  const double scale = 1.0 / maxval;

  if (magic == "P2") {
    for (Eigen::Index k = 0; k < count; ++k) image.pixels[k] = pgm_int(in) * scale;
  } else {
    // Single whitespace byte separates the header from the payload.
    const int bytes = maxval > 255 ? 2 : 1;
    std::string payload(static_cast<size_t>(count) * bytes, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (in.gcount() != static_cast<std::streamsize>(payload.size())) {
      throw std::runtime_error("pgm: truncated payload");
    }
    for (Eigen::Index k = 0; k < count; ++k) {
      unsigned value;
      if (bytes == 1) {
        value = static_cast<unsigned char>(payload[static_cast<size_t>(k)]);
      } else {  // 16-bit samples are big-endian
        value = (static_cast<unsigned char>(payload[2 * static_cast<size_t>(k)]) << 8) |
                static_cast<unsigned char>(payload[2 * static_cast<size_t>(k) + 1]);
      }
      image.pixels[k] = value * scale;
    }
  }
  return image;
}

GrayImage load_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return load_pgm(in);
}

void save_pgm(const GrayImage& image, std::ostream& out) {
  if (image.height < 1 || image.width < 1 ||
      image.pixels.size() != static_cast<Eigen::Index>(image.height) * image.width) {
    throw std::invalid_argument("save_pgm: malformed image");
  }
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  for (Eigen::Index k = 0; k < image.pixels.size(); ++k) {
    const double clamped = std::clamp(image.pixels[k], 0.0, 1.0);
    out.put(static_cast<char>(std::lround(clamped * 255.0)));
  }
}

void save_pgm_file(const GrayImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_pgm(image, out);
}

GrayImage add_gaussian_noise(const GrayImage& image, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  GrayImage noisy = image;
  if (sigma == 0.0) return noisy;
  rng::Engine eng(seed);
  for (Eigen::Index k = 0; k < noisy.pixels.size(); ++k) {
    noisy.pixels[k] += sigma * rng::gaussian(eng);
  }
  return noisy;
}

std::vector<std::vector<int>> partition_grid(int height, int width, int block) {
  if (block < 1 || height % block != 0 || width % block != 0) {
    throw std::invalid_argument("partition_grid: block must divide both dimensions");
  }
  std::vector<std::vector<int>> blocks;
  blocks.reserve(static_cast<size_t>(height / block) * (width / block));
  for (int bi = 0; bi < height / block; ++bi) {
    for (int bj = 0; bj < width / block; ++bj) {
      std::vector<int> pixels;
      pixels.reserve(static_cast<size_t>(block) * block);
      for (int i = 0; i < block; ++i) {
        for (int j = 0; j < block; ++j) {
          pixels.push_back((bi * block + i) * width + (bj * block + j));
        }
      }
      blocks.push_back(std::move(pixels));
    }
  }
  return blocks;
}

double psnr(const GrayImage& a, const GrayImage& b) {
  if (a.height != b.height || a.width != b.width) {
    throw std::invalid_argument("psnr: image shapes differ");
  }
  const double mse = (a.pixels - b.pixels).squaredNorm() / a.pixels.size();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

GrayImage make_shapes_image(int height, int width) {
  if (height < 1 || width < 1) throw std::invalid_argument("make_shapes_image: bad size");
  GrayImage image;
  image.height = height;
  image.width = width;
  image.pixels = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(height) * width, 0.15);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const double fi = (i + 0.5) / height;
      const double fj = (j + 0.5) / width;
      if (fi > 0.1 && fi < 0.45 && fj > 0.1 && fj < 0.5) image.at(i, j) = 0.85;
      if (fi > 0.55 && fi < 0.9 && fj > 0.15 && fj < 0.35) image.at(i, j) = 0.5;
      const double di = fi - 0.65;
      const double dj = fj - 0.7;
      if (di * di + dj * dj < 0.04) image.at(i, j) = 1.0;
    }
  }
  return image;
}

}  // namespace visolve
