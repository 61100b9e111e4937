#include "taskdict/types.hpp"

#include <stdexcept>

namespace taskdict {

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

bool Dictionary::is_feasible() const {
  if (atoms.rows() < 1 || atoms.cols() < 1) return false;
  if (!atoms.allFinite()) return false;
  for (Index j = 0; j < atoms.cols(); ++j) {
    if (atoms.col(j).norm() > 1.0 + feasibility_slack) return false;
  }
  return true;
}

void Dictionary::require_feasible(const std::string& context) const {
  if (atoms.rows() < 1 || atoms.cols() < 1) {
    throw std::invalid_argument(context + ": needs at least one row and one atom");
  }
  if (!atoms.allFinite()) {
    throw std::invalid_argument(context + ": non-finite entries");
  }
  for (Index j = 0; j < atoms.cols(); ++j) {
    const double n = atoms.col(j).norm();
    if (n > 1.0 + feasibility_slack) {
      throw std::invalid_argument(context + ": atom " + std::to_string(j) +
                                  " has norm " + std::to_string(n) + " > 1");
    }
  }
}

}  // namespace taskdict
