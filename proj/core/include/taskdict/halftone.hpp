#pragma once

#include "taskdict/image.hpp"

namespace taskdict {

/// Floyd-Steinberg error diffusion: plain raster scan (left to right, top to
/// bottom), threshold 0.5, kernel weights 7/16 right, 3/16 below-left,
/// 5/16 below, 1/16 below-right. Output pixels are exactly 0 or 1.
/// Input values outside [0, 1] are clamped; the clamped pixel count is
/// returned through `clamped` when given.
Image floyd_steinberg(const Image& image, long* clamped = nullptr);

}  // namespace taskdict
