#pragma once

#include <Eigen/Core>

#include <string>

namespace taskdict {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dictionary of atoms: an m x p matrix whose columns live in the unit l2
/// ball. Overcomplete (p > m) is allowed. Immutable by convention after
/// construction; safe to share across threads.
struct Dictionary {
  Matrix atoms;  // m x p, one atom per column

  Dictionary() = default;
  explicit Dictionary(Matrix a) : atoms(std::move(a)) {}

  Index signal_dim() const { return atoms.rows(); }
  Index atom_count() const { return atoms.cols(); }

  /// Column norms may exceed 1 by at most this much.
  static constexpr double feasibility_slack = 1e-12;

  bool is_feasible() const;

  /// Throws std::invalid_argument naming the first offending column.
  void require_feasible(const std::string& context = "dictionary") const;
};

/// One training or evaluation sample. Which fields are meaningful depends on
/// the task: regression and compressed sensing use `target`, classification
/// uses `label` (+/-1 binary, 1..q multi-class). Unlabeled samples carry only
/// `x`.
struct Sample {
  Vector x;
  Vector target;
  int label = 0;
};

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

}  // namespace taskdict
