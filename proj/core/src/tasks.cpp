#include "taskdict/tasks.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace taskdict {

namespace {

SparseCode encode_for(const TrainedModel& model, const Vector& x) {
  const Vector x_enc = model.z ? Vector(*model.z * x) : x;
  return solve(x_enc, model.dict, model.config.coding_params());
}

}  // namespace

const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::regression: return "regression";
    case TaskKind::binary_linear: return "binary_linear";
    case TaskKind::binary_bilinear: return "binary_bilinear";
    case TaskKind::multiclass_ova: return "multiclass_ova";
    case TaskKind::multiclass_softmax: return "multiclass_softmax";
    case TaskKind::multiclass_regression: return "multiclass_regression";
    case TaskKind::compressed_sensing: return "compressed_sensing";
  }
  return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
  if (name == "regression") return TaskKind::regression;
  if (name == "binary_linear") return TaskKind::binary_linear;
  if (name == "binary_bilinear") return TaskKind::binary_bilinear;
  if (name == "multiclass_ova") return TaskKind::multiclass_ova;
  if (name == "multiclass_softmax") return TaskKind::multiclass_softmax;
  if (name == "multiclass_regression") return TaskKind::multiclass_regression;
  if (name == "compressed_sensing") return TaskKind::compressed_sensing;
  throw std::invalid_argument("unknown task kind: " + name);
}

TaskLoss TaskSpec::loss() const {
  switch (kind) {
    case TaskKind::regression: return {LossKind::square, q};
    case TaskKind::binary_linear: return {LossKind::logistic, 1};
    case TaskKind::binary_bilinear: return {LossKind::bilinear_logistic, 1};
    case TaskKind::multiclass_ova: return {LossKind::logistic, 1};
    case TaskKind::multiclass_softmax: return {LossKind::softmax, q};
    case TaskKind::multiclass_regression: return {LossKind::square, q};
    case TaskKind::compressed_sensing: return {LossKind::square, m};
  }
  throw std::logic_error("TaskSpec::loss: unhandled kind");
}

void TaskSpec::validate() const {
  if (m < 1 || p < 1) throw std::invalid_argument("task: m and p must be >= 1");
  switch (kind) {
    case TaskKind::regression:
    case TaskKind::multiclass_regression:
    case TaskKind::multiclass_softmax:
      if (q < 1) throw std::invalid_argument("task: q must be >= 1");
      break;
    case TaskKind::multiclass_ova:
      if (q < 1) throw std::invalid_argument("task: q must be >= 1");
      break;
    case TaskKind::binary_linear:
    case TaskKind::binary_bilinear:
      break;
    case TaskKind::compressed_sensing:
      if (r < 1) throw std::invalid_argument("compressed sensing: r must be >= 1");
      break;
  }
}

Vector predict_regression(const TrainedModel& model, const Vector& x) {
  const SparseCode code = encode_for(model, x);
  if (model.w.cols() != code.alpha.size()) {
    throw std::invalid_argument("predict_regression: W columns do not match code length");
  }
  return model.w * code.alpha;
}

int classify_binary(const TrainedModel& model, const Vector& x, double* score) {
  const SparseCode code = encode_for(model, x);
  const double s = model.w.col(0).dot(code.alpha);
  if (score) *score = s;
  return s < 0.0 ? -1 : 1;
}

int classify_bilinear(const TrainedModel& model, const Vector& x, double* score) {
  const SparseCode code = encode_for(model, x);
  const double s = x.dot(model.w * code.alpha);
  if (score) *score = s;
  return s < 0.0 ? -1 : 1;
}

int classify_multiclass(const TaskModel& model, const Vector& x, Vector* scores_out) {
  if (model.models.empty()) throw std::invalid_argument("classify_multiclass: no models");
  Vector scores;
  if (model.spec.kind == TaskKind::multiclass_ova) {
    scores.resize(static_cast<Index>(model.models.size()));
    for (std::size_t k = 0; k < model.models.size(); ++k) {
      double s = 0.0;
      classify_binary(model.models[k], x, &s);
      scores(static_cast<Index>(k)) = s;
    }
  } else {
    const TrainedModel& single = model.models.front();
    const SparseCode code = encode_for(single, x);
    scores = single.w * code.alpha;
  }
  Index best = 0;
  for (Index k = 1; k < scores.size(); ++k) {
    if (scores(k) > scores(best)) best = k;  // ties keep the lowest index
  }
  if (scores_out) *scores_out = scores;
  return static_cast<int>(best) + 1;
}

Vector cs_reconstruct(const TrainedModel& model, const Vector& x) {
  if (!model.z) throw std::invalid_argument("cs_reconstruct: model has no sensing matrix");
  const SparseCode code = encode_for(model, x);
  return model.w * code.alpha;
}

Matrix make_baseline_z(BaselineZ kind, const Matrix* data, Index r, Index m, Rng* rng) {
  switch (kind) {
    case BaselineZ::identity: {
      if (r != m) throw std::invalid_argument("baseline z: identity needs r == m");
      return Matrix::Identity(r, m);
    }
    case BaselineZ::random_gaussian: {
      if (!rng) throw std::invalid_argument("baseline z: random draw needs an rng");
      Matrix Z(r, m);
      const double sd = 1.0 / std::sqrt(static_cast<double>(m));  // entry variance 1/m
      for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < m; ++j) Z(i, j) = rng->gaussian(0.0, sd);
      }
      return Z;
    }
    case BaselineZ::pca: {
      if (!data) throw std::invalid_argument("baseline z: pca needs data");
      if (data->rows() != m) throw std::invalid_argument("baseline z: data rows must equal m");
      if (r > m) throw std::invalid_argument("baseline z: pca needs r <= m");
      const Vector mean = data->rowwise().mean();
      const Matrix centered = data->colwise() - mean;
      const Matrix cov = centered * centered.transpose() /
                         std::max<double>(1.0, static_cast<double>(data->cols() - 1));
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
      if (eig.info() != Eigen::Success) throw std::runtime_error("baseline z: pca failed");
      // Eigenvalues ascend; take the trailing r eigenvectors as rows.
      Matrix Z(r, m);
      for (Index i = 0; i < r; ++i) {
        Z.row(i) = eig.eigenvectors().col(m - 1 - i).transpose();
      }
      return Z;
    }
  }
  throw std::logic_error("make_baseline_z: unhandled kind");
}

Matrix overcomplete_dct(int side, int p) {
  if (side < 1 || p < 1) throw std::invalid_argument("overcomplete_dct: bad sizes");
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  // 1-D grid of evenly spaced cosine frequencies, DC removed from the
  // non-constant atoms.
  Matrix base(side, grid);
  for (int k = 0; k < grid; ++k) {
    for (int i = 0; i < side; ++i) {
      base(i, k) = std::cos(M_PI * static_cast<double>(i) * static_cast<double>(k) /
                            static_cast<double>(grid));
    }
    if (k > 0) base.col(k).array() -= base.col(k).mean();
    const double n = base.col(k).norm();
    if (n > 0.0) base.col(k) /= n;
  }
  Matrix D(side * side, p);
  // Kronecker columns in (k1, k2) order; keep the first p.
  int col = 0;
  for (int k1 = 0; k1 < grid && col < p; ++k1) {
    for (int k2 = 0; k2 < grid && col < p; ++k2) {
      for (int i1 = 0; i1 < side; ++i1) {
        for (int i2 = 0; i2 < side; ++i2) {
          D(i1 * side + i2, col) = base(i1, k1) * base(i2, k2);
        }
      }
      const double n = D.col(col).norm();
      if (n > 0.0) D.col(col) /= n;
      ++col;
    }
  }
  return D;
}

}  // namespace taskdict
