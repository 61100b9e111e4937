#include "taskdict/halftone.hpp"

#include <cstdio>

namespace taskdict {

Image floyd_steinberg(const Image& image, long* clamped) {
  const Index h = image.height();
  const Index w = image.width();
  Matrix work = image.pix;

  long clipped = 0;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      double& v = work(r, c);
      if (v < 0.0 || v > 1.0) {
        v = v < 0.0 ? 0.0 : 1.0;
        ++clipped;
      }
    }
  }

  Image out(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double old = work(r, c);
      const double quantized = old >= 0.5 ? 1.0 : 0.0;
      out.pix(r, c) = quantized;
      const double err = old - quantized;
      if (c + 1 < w) work(r, c + 1) += err * (7.0 / 16.0);
      if (r + 1 < h) {
        if (c > 0) work(r + 1, c - 1) += err * (3.0 / 16.0);
        work(r + 1, c) += err * (5.0 / 16.0);
        if (c + 1 < w) work(r + 1, c + 1) += err * (1.0 / 16.0);
      }
    }
  }
  if (clamped) {
    *clamped = clipped;
  } else if (clipped > 0) {
    std::fprintf(stderr, "floyd_steinberg: clamped %ld pixel(s) outside [0,1]\n", clipped);
  }
  return out;
}

}  // namespace taskdict
