#include "taskdict/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "taskdict/parallel.hpp"

namespace taskdict {

namespace {

// Relative tolerance for deciding that two path breakpoints coincide.
constexpr double kTieTol = 1e-12;

// Appends one atom to the Cholesky factor held in the leading n x n block of
// L. `cross` holds the Gram products against the current active atoms and
// `diag` the new regularized diagonal entry. Returns false when the extended
// matrix is not positive definite.
bool chol_append(Matrix& L, Index n, const Vector& cross, double diag) {
  Vector w(n);
  if (n > 0) {
    w = L.topLeftCorner(n, n).triangularView<Eigen::Lower>().solve(cross);
    L.block(n, 0, 1, n) = w.transpose();
  }
  const double rem = diag - w.squaredNorm();
  if (!(rem > 1e-14 * std::max(1.0, diag))) return false;
  L(n, n) = std::sqrt(rem);
  return true;
}

// Removes index k from the factor of an n x n matrix: deletes row k and
// re-triangularizes the trailing block with Givens rotations on column pairs.
void chol_remove(Matrix& L, Index n, Index k) {
  for (Index i = k; i + 1 < n; ++i) {
    L.row(i).head(i + 2) = L.row(i + 1).head(i + 2);
  }
  for (Index i = k; i + 1 < n; ++i) {
    const double a = L(i, i);
    const double b = L(i, i + 1);
    const double r = std::hypot(a, b);
    if (r == 0.0) continue;
    const double c = a / r;
    const double s = b / r;
    for (Index row = i; row + 1 < n; ++row) {
      const double t1 = L(row, i);
      const double t2 = L(row, i + 1);
      L(row, i) = c * t1 + s * t2;
      L(row, i + 1) = -s * t1 + c * t2;
    }
    L(i, i + 1) = 0.0;
  }
}

class Homotopy {
 public:
  Homotopy(const Vector& x, const Dictionary& dict, const ElasticNetParams& params,
           const Matrix* full_gram)
      : x_(x),
        D_(dict.atoms),
        params_(params),
        full_gram_(full_gram),
        m_(D_.rows()),
        p_(D_.cols()),
        cap_(params.active_cap(m_, p_)) {
    if (!full_gram_) {
      gram_cols_.resize(p_);
      gram_have_.assign(static_cast<std::size_t>(p_), 0);
    }
  }

  SparseCode run() {
    dtx_ = D_.transpose() * x_;
    const double l1 = params_.lambda1;

    SparseCode code;
    code.alpha = Vector::Zero(p_);

    const double lam_max = p_ > 0 ? dtx_.cwiseAbs().maxCoeff() : 0.0;
    if (lam_max <= l1) {
      code.signs.resize(0);
      code.chol.resize(0, 0);
      code.objective = 0.5 * x_.squaredNorm();
      return code;
    }

    in_active_.assign(static_cast<std::size_t>(p_), 0);
    reserve(16);

    // First atom: the largest correlation, lowest index on ties.
    lam_ = lam_max;
    for (Index j = 0; j < p_; ++j) {
      if (std::abs(dtx_(j)) >= lam_max * (1.0 - kTieTol)) {
        add_atom(j, dtx_(j) > 0.0 ? 1.0 : -1.0);
        break;
      }
    }

    const int max_steps = static_cast<int>(8 * (p_ + cap_) + 32);
    int last_dropped = -1;
    double last_drop_lam = -1.0;

    Vector a_dir, b_dir, u, v;
    for (int step = 0; step <= max_steps; ++step) {
      const Index n = static_cast<Index>(active_.size());
      solve_directions(a_dir, b_dir);
      u = dtx_ - gram_active_.leftCols(n) * a_dir;
      v = gram_active_.leftCols(n) * b_dir;

      // Next breakpoint as lambda decreases: an inactive atom reaching the
      // correlation bound (join) or an active coefficient crossing zero while
      // heading for the wrong sign (drop).
      const double hi = lam_ * (1.0 + kTieTol);
      const double tie = kTieTol * std::max(1.0, lam_);

      double join_lam = -1.0;
      Index join_idx = -1;
      double join_sign = 0.0;
      for (Index j = 0; j < p_; ++j) {
        if (in_active_[static_cast<std::size_t>(j)]) continue;
        for (const double sgn : {1.0, -1.0}) {
          // c_j(l) = u_j + l v_j meets sgn * l at l = u_j / (sgn - v_j).
          const double den = sgn - v(j);
          if (std::abs(den) < 1e-300) continue;
          const double cand = u(j) / den;
          if (!std::isfinite(cand) || cand <= l1 || cand > hi) continue;
          if (j == last_dropped && cand >= last_drop_lam * (1.0 - kTieTol)) continue;
          if (cand > join_lam + tie) {
            join_lam = cand;
            join_idx = j;
            join_sign = sgn;
          }
        }
      }

      double drop_lam = -1.0;
      Index drop_pos = -1;
      for (Index k = 0; k < n; ++k) {
        if (signs_[static_cast<std::size_t>(k)] * b_dir(k) >= 0.0) continue;
        const double cand = a_dir(k) / b_dir(k);
        if (!std::isfinite(cand) || cand <= l1 || cand > hi) continue;
        if (cand > drop_lam + tie) {
          drop_lam = cand;
          drop_pos = k;
        }
      }

      if (join_idx < 0 && drop_pos < 0) {
        return finalize(code, a_dir, b_dir);
      }

      // Drops take precedence at coinciding breakpoints, so the factor never
      // carries a crossed coefficient into the next segment.
      const bool take_drop = drop_pos >= 0 && (join_idx < 0 || drop_lam >= join_lam - tie);
      const double new_lam = take_drop ? drop_lam : join_lam;
      if (new_lam < lam_ * (1.0 - kTieTol)) {
        last_dropped = -1;
      }
      lam_ = std::min(lam_, new_lam);
      if (take_drop) {
        last_dropped = active_[static_cast<std::size_t>(drop_pos)];
        last_drop_lam = lam_;
        remove_atom(drop_pos);
      } else {
        add_atom(join_idx, join_sign);
      }
    }
    throw std::runtime_error("solve: homotopy did not converge (possible breakpoint cycling)");
  }

 private:
  void reserve(Index capacity) {
    capacity = std::min<Index>(capacity, cap_);
    if (L_.rows() >= capacity) return;
    Matrix newL = Matrix::Zero(capacity, capacity);
    Matrix newG(p_, capacity);
    const Index n = static_cast<Index>(active_.size());
    if (n > 0) {
      newL.topLeftCorner(n, n) = L_.topLeftCorner(n, n);
      newG.leftCols(n) = gram_active_.leftCols(n);
    }
    L_ = std::move(newL);
    gram_active_ = std::move(newG);
  }

  // Column j of D^T D, cached or read from the shared batch Gram matrix.
  Eigen::Ref<const Vector> gram_col(Index j) {
    if (full_gram_) return full_gram_->col(j);
    auto& have = gram_have_[static_cast<std::size_t>(j)];
    if (!have) {
      gram_cols_[static_cast<std::size_t>(j)] = D_.transpose() * D_.col(j);
      have = 1;
    }
    return gram_cols_[static_cast<std::size_t>(j)];
  }

  void add_atom(Index j, double sgn) {
    const Index n = static_cast<Index>(active_.size());
    if (n >= cap_) {
      throw std::invalid_argument("solve: active set exceeded max_active = " +
                                  std::to_string(cap_));
    }
    if (n + 1 > L_.rows()) reserve(2 * (n + 1));
    Eigen::Ref<const Vector> gj = gram_col(j);
    Vector cross(n);
    for (Index i = 0; i < n; ++i) cross(i) = gj(active_[static_cast<std::size_t>(i)]);
    if (!chol_append(L_, n, cross, gj(j) + params_.lambda2)) {
      throw std::invalid_argument(
          "solve: regularized Gram matrix is singular on the active set; "
          "use lambda2 > 0");
    }
    gram_active_.col(n) = gj;
    active_.push_back(static_cast<int>(j));
    signs_.push_back(sgn);
    in_active_[static_cast<std::size_t>(j)] = 1;
  }

  void remove_atom(Index pos) {
    const Index n = static_cast<Index>(active_.size());
    chol_remove(L_, n, pos);
    in_active_[static_cast<std::size_t>(active_[static_cast<std::size_t>(pos)])] = 0;
    active_.erase(active_.begin() + pos);
    signs_.erase(signs_.begin() + pos);
    for (Index c = pos; c + 1 < n; ++c) gram_active_.col(c) = gram_active_.col(c + 1);
  }

  // alpha_A(lambda) = a - lambda * b with
  //   a = (D_A^T D_A + l2 I)^{-1} D_A^T x,  b = (...)^{-1} s.
  void solve_directions(Vector& a_dir, Vector& b_dir) const {
    const Index n = static_cast<Index>(active_.size());
    Vector rhs_a(n), rhs_b(n);
    for (Index i = 0; i < n; ++i) {
      rhs_a(i) = dtx_(active_[static_cast<std::size_t>(i)]);
      rhs_b(i) = signs_[static_cast<std::size_t>(i)];
    }
    const auto Lv = L_.topLeftCorner(n, n).triangularView<Eigen::Lower>();
    a_dir = Lv.solve(rhs_a);
    Lv.transpose().solveInPlace(a_dir);
    b_dir = Lv.solve(rhs_b);
    Lv.transpose().solveInPlace(b_dir);
  }

  SparseCode finalize(SparseCode& code, Vector& a_dir, Vector& b_dir) {
    lam_ = params_.lambda1;
    // Numerical safety: an atom whose coefficient lands at zero (or across
    // it) when the target lambda1 falls exactly on a breakpoint is dropped
    // before the certificate is assembled.
    while (!active_.empty()) {
      Vector alpha_a = a_dir - lam_ * b_dir;
      Index worst = -1;
      double worst_val = 0.0;
      for (Index k = 0; k < alpha_a.size(); ++k) {
        const double signed_val = alpha_a(k) * signs_[static_cast<std::size_t>(k)];
        if (signed_val <= 0.0 && (worst < 0 || signed_val < worst_val)) {
          worst = k;
          worst_val = signed_val;
        }
      }
      if (worst < 0) {
        const Index n = static_cast<Index>(active_.size());
        for (Index k = 0; k < n; ++k) {
          code.alpha(active_[static_cast<std::size_t>(k)]) = alpha_a(k);
        }
        break;
      }
      remove_atom(worst);
      if (!active_.empty()) solve_directions(a_dir, b_dir);
    }

    const Index n = static_cast<Index>(active_.size());
    code.active = active_;
    code.signs.resize(n);
    for (Index k = 0; k < n; ++k) code.signs(k) = signs_[static_cast<std::size_t>(k)];
    code.chol = L_.topLeftCorner(n, n);
    code.chol.triangularView<Eigen::StrictlyUpper>().setZero();

    Vector r = x_;
    for (Index k = 0; k < n; ++k) {
      const Index j = active_[static_cast<std::size_t>(k)];
      r -= D_.col(j) * code.alpha(j);
    }
    code.objective = 0.5 * r.squaredNorm() + params_.lambda1 * code.alpha.lpNorm<1>() +
                     0.5 * params_.lambda2 * code.alpha.squaredNorm();
    return code;
  }

  const Vector& x_;
  const Matrix& D_;
  const ElasticNetParams& params_;
  const Matrix* full_gram_;
  const Index m_;
  const Index p_;
  const Index cap_;

  Vector dtx_;
  double lam_ = 0.0;
  std::vector<int> active_;
  std::vector<double> signs_;
  std::vector<char> in_active_;
  Matrix L_;            // Cholesky factor buffer, leading block in use
  Matrix gram_active_;  // p x |A| cached Gram columns of the active atoms
  std::vector<Vector> gram_cols_;
  std::vector<char> gram_have_;
};

SparseCode solve_one(const Vector& x, const Dictionary& D, const ElasticNetParams& params,
                     const Matrix* full_gram) {
  if (x.size() != D.signal_dim()) {
    throw std::invalid_argument("solve: signal length " + std::to_string(x.size()) +
                                " does not match dictionary rows " +
                                std::to_string(D.signal_dim()));
  }
  if (!x.allFinite()) throw std::invalid_argument("solve: non-finite signal");
  return Homotopy(x, D, params, full_gram).run();
}

}  // namespace

void ElasticNetParams::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::invalid_argument("elastic net: lambda1 and lambda2 must be >= 0");
  }
  if (lambda1 == 0.0 && lambda2 == 0.0 && !allow_unregularized) {
    throw std::invalid_argument(
        "elastic net: lambda1 = lambda2 = 0 is unregularized least squares; "
        "set allow_unregularized to request it");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("elastic net: tol must be > 0");
  if (max_active < 0) throw std::invalid_argument("elastic net: max_active must be >= 0");
}

int ElasticNetParams::active_cap(Index m, Index p) const {
  if (max_active > 0) return max_active;
  const Index cap = std::min<Index>(4 * p, 10 * m);
  return static_cast<int>(std::max<Index>(cap, 1));
}

SparseCode solve(const Vector& x, const Dictionary& D, const ElasticNetParams& params) {
  params.validate();
  D.require_feasible("solve");
  return solve_one(x, D, params, nullptr);
}

KktReport check_kkt(const Vector& x, const Dictionary& D, const Vector& alpha,
                    const ElasticNetParams& params) {
  if (x.size() != D.signal_dim() || alpha.size() != D.atom_count()) {
    throw std::invalid_argument("check_kkt: shape mismatch");
  }
  const Vector r = x - D.atoms * alpha;
  const Vector g = D.atoms.transpose() * r - params.lambda2 * alpha;
  KktReport report;
  for (Index j = 0; j < alpha.size(); ++j) {
    const double mag = std::abs(g(j));
    if (alpha(j) != 0.0) {
      report.max_equality_violation =
          std::max(report.max_equality_violation, std::abs(mag - params.lambda1));
    } else {
      report.max_inequality_violation =
          std::max(report.max_inequality_violation, std::max(0.0, mag - params.lambda1));
    }
  }
  report.pass = report.max_equality_violation <= params.tol &&
                report.max_inequality_violation <= params.tol;
  return report;
}

Vector active_closed_form(const Vector& x, const Dictionary& D,
                          const std::vector<int>& active, const Vector& signs,
                          const ElasticNetParams& params) {
  if (active.empty()) throw std::invalid_argument("active_closed_form: empty active set");
  if (signs.size() != static_cast<Index>(active.size())) {
    throw std::invalid_argument("active_closed_form: signs/active size mismatch");
  }
  const Index n = static_cast<Index>(active.size());
  Matrix sub(D.signal_dim(), n);
  for (Index k = 0; k < n; ++k) sub.col(k) = D.atoms.col(active[static_cast<std::size_t>(k)]);
  Matrix gram = sub.transpose() * sub;
  gram.diagonal().array() += params.lambda2;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "active_closed_form: regularized Gram matrix is singular; use lambda2 > 0");
  }
  return llt.solve(sub.transpose() * x - params.lambda1 * signs);
}

std::vector<SparseCode> batch_solve(const Matrix& X, const Dictionary& D,
                                    const ElasticNetParams& params, int threads) {
  params.validate();
  D.require_feasible("batch_solve");
  if (X.cols() < 1) throw std::invalid_argument("batch_solve: needs at least one column");
  if (X.rows() != D.signal_dim()) {
    throw std::invalid_argument("batch_solve: signal rows do not match dictionary");
  }
  const Matrix gram = D.atoms.transpose() * D.atoms;
  std::vector<SparseCode> codes(static_cast<std::size_t>(X.cols()));
  parallel_for(static_cast<std::size_t>(X.cols()), threads, [&](std::size_t i) {
    codes[i] = solve_one(X.col(static_cast<Index>(i)), D, params, &gram);
  });
  return codes;
}

double coding_objective(const Vector& x, const Dictionary& D, const Vector& alpha,
                        const ElasticNetParams& params) {
  return 0.5 * (x - D.atoms * alpha).squaredNorm() + params.lambda1 * alpha.lpNorm<1>() +
         0.5 * params.lambda2 * alpha.squaredNorm();
}

}  // namespace taskdict
