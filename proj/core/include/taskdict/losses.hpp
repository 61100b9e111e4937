#pragma once

#include <string>

#include "taskdict/types.hpp"

namespace taskdict {

/// Supervised convex losses l(y, W, alpha), all twice continuously
/// differentiable in (W, alpha). Expected parameter shapes (p = code length):
///
///   square             W: q x p   y: length-q target
///   logistic           W: p x 1   y: +/-1
///   bilinear_logistic  W: m x p   y: +/-1, uses the raw signal x
///   softmax            W: q x p   y: class label in 1..q
enum class LossKind { square, logistic, bilinear_logistic, softmax };

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

/// Loss family plus the shape of its label space. `q` is the target dimension
/// for square and the class count for softmax; it is ignored by the binary
/// losses.
struct TaskLoss {
  LossKind kind = LossKind::square;
  int q = 1;
};

struct LossEval {
  double value = 0.0;
  Matrix grad_w;      // same shape as W
  Vector grad_alpha;  // length p
};

LossEval square_loss(const Vector& y, const Matrix& W, const Vector& alpha);
LossEval logistic_loss(int y, const Vector& w, const Vector& alpha);
LossEval bilinear_logistic_loss(int y, const Vector& x, const Matrix& W,
                                const Vector& alpha);
LossEval softmax_loss(int label, const Matrix& W, const Vector& alpha);

/// Dispatch on the loss kind; picks the relevant label field out of the
/// sample (`target` for square, `label` otherwise) and `x` for the bilinear
/// loss.
LossEval eval_loss(const TaskLoss& loss, const Sample& sample, const Matrix& W,
                   const Vector& alpha);

/// Expected shape of W for a loss, given code length p and signal length m.
std::pair<Index, Index> loss_w_shape(const TaskLoss& loss, Index p, Index m);

}  // namespace taskdict
