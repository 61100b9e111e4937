#pragma once

#include <string>

#include "taskdict/types.hpp"

namespace taskdict {

/// Grayscale image with intensities in [0, 1], stored row-major conceptually:
/// pix(r, c) is row r, column c.
struct Image {
  Matrix pix;  // h x w

  Image() = default;
  Image(Index h, Index w) : pix(Matrix::Zero(h, w)) {}
  explicit Image(Matrix m) : pix(std::move(m)) {}

  Index height() const { return pix.rows(); }
  Index width() const { return pix.cols(); }
};

/// Reads a binary PGM (P5, maxval 255). Throws DataError on malformed input.
Image read_pgm(const std::string& path);

/// Writes a binary PGM (P5, maxval 255); intensities are clamped to [0, 1]
/// and rounded to 8 bits.
void write_pgm(const Image& image, const std::string& path);

}  // namespace taskdict
