#include "taskdict/patches.hpp"

#include <stdexcept>

#include "taskdict/errors.hpp"

namespace taskdict {

void PatchConfig::validate() const {
  if (side < 1) throw std::invalid_argument("patches: side must be >= 1");
  if (stride < 1) throw std::invalid_argument("patches: stride must be >= 1");
}

PatchSet extract_patches(const Image& image, const PatchConfig& cfg) {
  cfg.validate();
  const Index h = image.height();
  const Index w = image.width();
  const Index side = cfg.side;
  if (h < side || w < side) {
    throw std::invalid_argument("patches: image " + std::to_string(h) + "x" +
                                std::to_string(w) + " smaller than patch side " +
                                std::to_string(side));
  }
  const Index rows = (h - side) / cfg.stride + 1;
  const Index cols = (w - side) / cfg.stride + 1;

  PatchSet set;
  set.patches.resize(cfg.dim(), rows * cols);
  set.positions.reserve(static_cast<std::size_t>(rows * cols));

  Index n = 0;
  Vector patch(cfg.dim());
  for (Index pr = 0; pr < rows; ++pr) {
    for (Index pc = 0; pc < cols; ++pc) {
      const Index r0 = pr * cfg.stride;
      const Index c0 = pc * cfg.stride;
      for (Index r = 0; r < side; ++r) {
        for (Index c = 0; c < side; ++c) {
          patch(r * side + c) = image.pix(r0 + r, c0 + c);
        }
      }
      if (cfg.zero_mean) patch.array() -= patch.mean();
      if (cfg.unit_norm) {
        const double nrm = patch.norm();
        if (nrm > 1e-10) {
          patch /= nrm;
        } else {
          patch.setZero();
        }
      }
      set.patches.col(n++) = patch;
      set.positions.emplace_back(static_cast<int>(r0), static_cast<int>(c0));
    }
  }
  return set;
}

Vector normalize(const Vector& x) {
  Vector out = x.array() - x.mean();
  const double nrm = out.norm();
  if (nrm > 1e-10) {
    out /= nrm;
  } else {
    out.setZero();
  }
  return out;
}

Image reconstruct_image(const Matrix& estimates,
                        const std::vector<std::pair<int, int>>& positions, Index h, Index w,
                        int side) {
  if (estimates.cols() != static_cast<Index>(positions.size())) {
    throw std::invalid_argument("reconstruct_image: estimates/positions count mismatch");
  }
  if (estimates.rows() != static_cast<Index>(side) * side) {
    throw std::invalid_argument("reconstruct_image: patch length does not match side^2");
  }
  Matrix sum = Matrix::Zero(h, w);
  Matrix count = Matrix::Zero(h, w);
  for (Index n = 0; n < estimates.cols(); ++n) {
    const auto [r0, c0] = positions[static_cast<std::size_t>(n)];
    if (r0 < 0 || c0 < 0 || r0 + side > h || c0 + side > w) {
      throw std::invalid_argument("reconstruct_image: patch position out of bounds");
    }
    for (Index r = 0; r < side; ++r) {
      for (Index c = 0; c < side; ++c) {
        sum(r0 + r, c0 + c) += estimates(r * side + c, n);
        count(r0 + r, c0 + c) += 1.0;
      }
    }
  }
  Image out(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      if (count(r, c) == 0.0) {
        throw DataError("reconstruct_image: pixel (" + std::to_string(r) + "," +
                        std::to_string(c) + ") not covered by any patch");
      }
      out.pix(r, c) = sum(r, c) / count(r, c);
    }
  }
  return out;
}

std::array<Image, 5> shift_augment(const Image& image) {
  const Index h = image.height();
  const Index w = image.width();
  if (h < 3 || w < 3) throw std::invalid_argument("shift_augment: image must be at least 3x3");

  std::array<Image, 5> out{image, Image(h, w), Image(h, w), Image(h, w), Image(h, w)};
  out[1].pix.topRows(h - 1) = image.pix.bottomRows(h - 1);     // up
  out[2].pix.bottomRows(h - 1) = image.pix.topRows(h - 1);     // down
  out[3].pix.leftCols(w - 1) = image.pix.rightCols(w - 1);     // left
  out[4].pix.rightCols(w - 1) = image.pix.leftCols(w - 1);     // right
  return out;
}

}  // namespace taskdict
