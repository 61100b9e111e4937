#pragma once

#include <vector>

#include "taskdict/types.hpp"

namespace taskdict {

/// Weights and tolerances of the sparse coding problem
///
///   min_a  1/2 ||x - D a||_2^2 + lambda1 ||a||_1 + lambda2/2 ||a||_2^2.
///
/// lambda2 > 0 makes the problem strongly convex (unique solution, Lipschitz
/// in x and D); lambda2 = 0 is accepted but rank-deficient active sets then
/// fail instead of being pseudo-inverted.
struct ElasticNetParams {
  double lambda1 = 0.15;
  double lambda2 = 0.01;
  double tol = 1e-6;   // KKT residual tolerance
  int max_active = 0;  // cap on |active set|; 0 selects min(4p, 10m)
  /// lambda1 = lambda2 = 0 turns the problem into unregularized least squares;
  /// that is rejected unless explicitly requested here.
  bool allow_unregularized = false;

  void validate() const;
  int active_cap(Index m, Index p) const;
};

/// Solution of the sparse coding problem together with the certificates the
/// downstream gradient computations need: the active set, its signs, and the
/// Cholesky factor of the regularized Gram matrix
///   chol * chol^T = D_A^T D_A + lambda2 I   (A = active, in order).
struct SparseCode {
  Vector alpha;             // length p, zero off the active set
  std::vector<int> active;  // indices in the order the path admitted them
  Vector signs;             // +/-1 per active index
  Matrix chol;              // |A| x |A| lower triangular
  double objective = 0.0;   // problem value at alpha
};

struct KktReport {
  double max_equality_violation = 0.0;    // over nonzero coefficients
  double max_inequality_violation = 0.0;  // over zero coefficients
  bool pass = false;

  double max_violation() const {
    return max_equality_violation > max_inequality_violation
               ? max_equality_violation
               : max_inequality_violation;
  }
};

/// Solves the sparse coding problem by an elastic-net homotopy (LARS-style
/// path in the l1 weight), maintaining a rank-one-updated Cholesky factor of
/// the regularized Gram matrix on the active set.
SparseCode solve(const Vector& x, const Dictionary& D, const ElasticNetParams& params);

/// Subgradient optimality certificate. For every atom j, with
/// g_j = d_j^T (x - D alpha) - lambda2 alpha[j]:
///   alpha[j] != 0:  equality violation   | |g_j| - lambda1 |
///   alpha[j] == 0:  inequality violation max(0, |g_j| - lambda1)
/// Passes iff both maxima are <= params.tol.
KktReport check_kkt(const Vector& x, const Dictionary& D, const Vector& alpha,
                    const ElasticNetParams& params);

/// Closed form of the solution restricted to a known active set and signs:
///   (D_A^T D_A + lambda2 I)^{-1} (D_A^T x - lambda1 s).
/// Throws if the regularized Gram matrix is singular (possible only when
/// lambda2 = 0 and the active atoms are collinear).
Vector active_closed_form(const Vector& x, const Dictionary& D,
                          const std::vector<int>& active, const Vector& signs,
                          const ElasticNetParams& params);

/// Codes every column of X. The Gram matrix D^T D is formed once and shared;
/// columns are independent, so results do not depend on the worker count.
std::vector<SparseCode> batch_solve(const Matrix& X, const Dictionary& D,
                                    const ElasticNetParams& params, int threads = 1);

/// Objective value of the sparse coding problem at an arbitrary alpha.
double coding_objective(const Vector& x, const Dictionary& D, const Vector& alpha,
                        const ElasticNetParams& params);

}  // namespace taskdict
