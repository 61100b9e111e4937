#pragma once

#include <array>
#include <utility>
#include <vector>

#include "taskdict/image.hpp"
#include "taskdict/types.hpp"

namespace taskdict {

/// Sliding-window patch extraction. A patch is side x side, flattened
/// row-major into a vector of length side^2.
struct PatchConfig {
  int side = 8;
  int stride = 1;
  bool zero_mean = false;
  bool unit_norm = false;

  void validate() const;
  Index dim() const { return static_cast<Index>(side) * side; }
};

struct PatchSet {
  Matrix patches;                                  // m x n, one patch per column
  std::vector<std::pair<int, int>> positions;      // top-left (row, col) per patch
};

/// Row-major sliding-window extraction at the configured stride. The patch
/// count is (floor((h-side)/stride)+1) * (floor((w-side)/stride)+1).
/// Normalization flags are applied per patch (centering first, then
/// rescaling; see `normalize`).
PatchSet extract_patches(const Image& image, const PatchConfig& cfg);

/// Subtracts the mean; if the centered norm exceeds 1e-10 divides by it,
/// otherwise returns the zero vector. Output norm is always 0 or 1.
Vector normalize(const Vector& x);

/// Averages overlapping patch estimates back into an h x w image. Every pixel
/// must be covered by at least one patch.
Image reconstruct_image(const Matrix& estimates,
                        const std::vector<std::pair<int, int>>& positions, Index h, Index w,
                        int side);

/// The image plus its four one-pixel shifts, zero-padded at the boundary.
/// Order: original, up, down, left, right.
std::array<Image, 5> shift_augment(const Image& image);

}  // namespace taskdict
