#pragma once

#include <string>
#include <vector>

#include "taskdict/rng.hpp"
#include "taskdict/trainer.hpp"
#include "taskdict/types.hpp"

namespace taskdict {

/// Task heads binding a loss, an encoder input, and a prediction rule.
/// multiclass_ova holds one (D_k, w_k) pair per class; every other kind holds
/// a single triple. compressed_sensing encodes Z*x against an r-row
/// dictionary and decodes with an m x p matrix W.
enum class TaskKind {
  regression,
  binary_linear,
  binary_bilinear,
  multiclass_ova,
  multiclass_softmax,
  multiclass_regression,
  compressed_sensing,
};

const char* task_kind_name(TaskKind kind);
TaskKind task_kind_from_name(const std::string& name);

struct TaskSpec {
  TaskKind kind = TaskKind::regression;
  int m = 0;  // signal dimension
  int p = 0;  // atom count
  int q = 0;  // target dimension / class count
  int r = 0;  // sensed dimension (compressed sensing only)

  bool has_transform() const { return kind == TaskKind::compressed_sensing; }
  int model_count() const { return kind == TaskKind::multiclass_ova ? q : 1; }
  /// Dictionary row dimension: r when the encoder sees Z*x, m otherwise.
  int encoder_dim() const { return has_transform() ? r : m; }
  TaskLoss loss() const;
  void validate() const;
};

/// A task model: the spec plus one trained triple per class (a single one for
/// everything except one-vs-all).
struct TaskModel {
  TaskSpec spec;
  std::vector<TrainedModel> models;
};

/// W alpha*(x, D).
Vector predict_regression(const TrainedModel& model, const Vector& x);

/// sign(w^T alpha*), score 0 maps to +1.
int classify_binary(const TrainedModel& model, const Vector& x, double* score = nullptr);

/// sign(x^T W alpha*), score 0 maps to +1.
int classify_bilinear(const TrainedModel& model, const Vector& x, double* score = nullptr);

/// Label in 1..q. One-vs-all takes the argmax of the per-class scores
/// w_k^T alpha*(x, D_k); softmax and one-hot regression take the argmax
/// coordinate of the single model's scores. Ties resolve to the lowest index.
int classify_multiclass(const TaskModel& model, const Vector& x, Vector* scores = nullptr);

/// W alpha*(Z x, D), the decoded estimate of the original signal.
Vector cs_reconstruct(const TrainedModel& model, const Vector& x);

enum class BaselineZ { random_gaussian, pca, identity };

/// Sensing-matrix baselines: i.i.d. Gaussian entries with variance 1/m,
/// the top-r principal directions of the (centered) data as rows, or the
/// identity (r must equal m).
Matrix make_baseline_z(BaselineZ kind, const Matrix* data, Index r, Index m, Rng* rng);

/// Overcomplete 2-D DCT dictionary for side x side patches (m = side^2,
/// p <= ceil(sqrt(p))^2 columns kept): the Kronecker product of two 1-D
/// grids of evenly spaced cosine frequencies, each atom normalized.
Matrix overcomplete_dct(int side, int p);

}  // namespace taskdict
