#pragma once

#include <taskdict/elastic_net.hpp>
#include <taskdict/types.hpp>

namespace taskdict::testing {

/// Independent reference solver for the sparse coding problem: cyclic
/// coordinate descent with exact single-coordinate minimization, run until
/// its own KKT residual drops below `kkt_stop` (with an objective-stall
/// safety stop). Shares no code with the homotopy path.
Vector coordinate_descent_oracle(const Vector& x, const Dictionary& D,
                                 const ElasticNetParams& params, double kkt_stop = 1e-9,
                                 int max_sweeps = 100000);

}  // namespace taskdict::testing
