#pragma once

#include <optional>

#include "taskdict/elastic_net.hpp"
#include "taskdict/losses.hpp"
#include "taskdict/types.hpp"

namespace taskdict {

/// Per-sample gradients of the task objective with respect to the model
/// parameters. grad_d rows live in the encoder input space (r rows when a
/// transform is present, m otherwise).
struct SampleGradients {
  Matrix grad_w;
  Matrix grad_d;
  std::optional<Matrix> grad_z;  // r x m, present iff the model has a transform
  Vector beta;                   // length p, supported on the code's active set
  double loss_value = 0.0;       // l(y, W, alpha*) at the sample
};

/// Solves (D_A^T D_A + lambda2 I) beta_A = grad_alpha_A through the two
/// triangular systems of the code's Cholesky factor; beta is zero off the
/// active set. No new factorization is performed.
Vector compute_beta(const SparseCode& code, const Vector& grad_alpha);

/// Gradients of l(y, W, alpha*(x_enc, D)) for one sample, where the encoder
/// input x_enc is Z * x when a transform is given and x itself otherwise.
/// The code must have been solved against that encoder input.
///
///   grad_w = d l / d W at alpha*
///   grad_d = -D beta alpha^T + (x_enc - D alpha) beta^T
///   grad_z = (D beta) x^T            (only with a transform)
SampleGradients grad_sample(const TaskLoss& loss, const Sample& sample, const Matrix& W,
                            const Dictionary& D, const std::optional<Matrix>& Z,
                            const SparseCode& code);

/// Gradient of the reconstruction loss 1/2||x - D alpha*||^2 + penalties with
/// respect to D at a fixed code: -(x - D alpha) alpha^T.
Matrix unsup_grad_d(const Vector& x, const Dictionary& D, const SparseCode& code);

}  // namespace taskdict
