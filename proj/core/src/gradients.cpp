#include "taskdict/gradients.hpp"

#include <stdexcept>

namespace taskdict {

Vector compute_beta(const SparseCode& code, const Vector& grad_alpha) {
  const Index n = static_cast<Index>(code.active.size());
  if (code.chol.rows() != n || code.chol.cols() != n) {
    throw std::invalid_argument("compute_beta: Cholesky factor does not match active set");
  }
  Vector beta = Vector::Zero(grad_alpha.size());
  if (n == 0) return beta;

  Vector rhs(n);
  for (Index k = 0; k < n; ++k) {
    const int j = code.active[static_cast<std::size_t>(k)];
    if (j < 0 || j >= grad_alpha.size()) {
      throw std::invalid_argument("compute_beta: active index out of range");
    }
    rhs(k) = grad_alpha(j);
  }
  const auto L = code.chol.triangularView<Eigen::Lower>();
  Vector sol = L.solve(rhs);
  L.transpose().solveInPlace(sol);
  for (Index k = 0; k < n; ++k) {
    beta(code.active[static_cast<std::size_t>(k)]) = sol(k);
  }
  return beta;
}

SampleGradients grad_sample(const TaskLoss& loss, const Sample& sample, const Matrix& W,
                            const Dictionary& D, const std::optional<Matrix>& Z,
                            const SparseCode& code) {
  const Vector x_enc = Z ? Vector(*Z * sample.x) : sample.x;
  if (x_enc.size() != D.signal_dim()) {
    throw std::invalid_argument("grad_sample: encoder input does not match dictionary");
  }

  const LossEval eval = eval_loss(loss, sample, W, code.alpha);

  SampleGradients out;
  out.grad_w = eval.grad_w;
  out.loss_value = eval.value;
  out.beta = compute_beta(code, eval.grad_alpha);

  //   grad_d = -(D beta) alpha^T + (x_enc - D alpha) beta^T
  // Both outer products are supported on the active columns only.
  const Vector d_beta = D.atoms * out.beta;
  const Vector residual = x_enc - D.atoms * code.alpha;
  out.grad_d = Matrix::Zero(D.signal_dim(), D.atom_count());
  for (const int j : code.active) {
    out.grad_d.col(j) = -d_beta * code.alpha(j) + residual * out.beta(j);
  }

  if (Z) {
    out.grad_z = d_beta * sample.x.transpose();
  }
  return out;
}

Matrix unsup_grad_d(const Vector& x, const Dictionary& D, const SparseCode& code) {
  if (x.size() != D.signal_dim() || code.alpha.size() != D.atom_count()) {
    throw std::invalid_argument("unsup_grad_d: shape mismatch");
  }
  const Vector residual = x - D.atoms * code.alpha;
  Matrix grad = Matrix::Zero(D.signal_dim(), D.atom_count());
  for (const int j : code.active) {
    grad.col(j) = -residual * code.alpha(j);
  }
  return grad;
}

}  // namespace taskdict
