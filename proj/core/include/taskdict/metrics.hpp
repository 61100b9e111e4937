#pragma once

#include <cmath>
#include <limits>

namespace taskdict {

/// PSNR in dB for 8-bit intensities: 10 log10(255^2 / mse), with mse measured
/// on the 0..255 scale. A zero error yields +infinity.
inline double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

/// mse for intensities in [0, 1] rescaled to the 8-bit convention above.
inline double mse_to_255_scale(double mse_unit) { return mse_unit * 255.0 * 255.0; }

}  // namespace taskdict
