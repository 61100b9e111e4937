#pragma once

#include <taskdict/image.hpp>
#include <taskdict/rng.hpp>

namespace taskdict::testing {

/// Deterministic synthetic grayscale image with natural-image statistics:
/// a 1/f-weighted mixture of random 2-D cosines plus a few soft-edged shapes
/// and a global gradient, rescaled into [0.02, 0.98]. Seeded draws give
/// reproducible fixtures across runs.
Image synthetic_image(Rng& rng, Index h, Index w);

}  // namespace taskdict::testing
