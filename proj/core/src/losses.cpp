#include "taskdict/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace taskdict {

namespace {

// log(1 + exp(-t)) without overflow for |t| up to ~700.
double log1p_exp_neg(double t) {
  if (t > 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

// sigma(-t) = 1 / (1 + exp(t)), the weight on the gradient of the logistic
// loss at margin t.
double sigmoid_neg(double t) {
  if (t > 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

void require_pm1(int y, const char* who) {
  if (y != 1 && y != -1) {
    throw std::invalid_argument(std::string(who) + ": label must be +1 or -1, got " +
                                std::to_string(y));
  }
}

}  // namespace

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::square: return "square";
    case LossKind::logistic: return "logistic";
    case LossKind::bilinear_logistic: return "bilinear_logistic";
    case LossKind::softmax: return "softmax";
  }
  return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "square") return LossKind::square;
  if (name == "logistic") return LossKind::logistic;
  if (name == "bilinear_logistic") return LossKind::bilinear_logistic;
  if (name == "softmax") return LossKind::softmax;
  throw std::invalid_argument("unknown loss kind: " + name);
}

LossEval square_loss(const Vector& y, const Matrix& W, const Vector& alpha) {
  if (W.rows() != y.size() || W.cols() != alpha.size()) {
    throw std::invalid_argument("square_loss: shape mismatch");
  }
  const Vector residual = y - W * alpha;
  LossEval out;
  out.value = 0.5 * residual.squaredNorm();
  out.grad_w = -residual * alpha.transpose();
  out.grad_alpha = -W.transpose() * residual;
  return out;
}

LossEval logistic_loss(int y, const Vector& w, const Vector& alpha) {
  require_pm1(y, "logistic_loss");
  if (w.size() != alpha.size()) {
    throw std::invalid_argument("logistic_loss: w and alpha lengths differ");
  }
  const double margin = y * w.dot(alpha);
  const double weight = sigmoid_neg(margin);
  LossEval out;
  out.value = log1p_exp_neg(margin);
  out.grad_w = (-y * weight) * alpha;  // p x 1
  out.grad_alpha = (-y * weight) * w;
  return out;
}

LossEval bilinear_logistic_loss(int y, const Vector& x, const Matrix& W,
                                const Vector& alpha) {
  require_pm1(y, "bilinear_logistic_loss");
  if (W.rows() != x.size() || W.cols() != alpha.size()) {
    throw std::invalid_argument("bilinear_logistic_loss: shape mismatch");
  }
  const double margin = y * x.dot(W * alpha);
  const double weight = sigmoid_neg(margin);
  LossEval out;
  out.value = log1p_exp_neg(margin);
  out.grad_w = (-y * weight) * x * alpha.transpose();
  out.grad_alpha = (-y * weight) * (W.transpose() * x);
  return out;
}

LossEval softmax_loss(int label, const Matrix& W, const Vector& alpha) {
  const Index q = W.rows();
  if (label < 1 || label > q) {
    throw std::invalid_argument("softmax_loss: label " + std::to_string(label) +
                                " out of range 1.." + std::to_string(q));
  }
  if (W.cols() != alpha.size()) {
    throw std::invalid_argument("softmax_loss: shape mismatch");
  }
  const Vector scores = W * alpha;
  const double top = scores.maxCoeff();
  const Vector shifted = (scores.array() - top).exp();
  const double total = shifted.sum();

  LossEval out;
  out.value = std::log(total) + top - scores(label - 1);
  Vector probs = shifted / total;
  probs(label - 1) -= 1.0;
  out.grad_w = probs * alpha.transpose();
  out.grad_alpha = W.transpose() * probs;
  return out;
}

LossEval eval_loss(const TaskLoss& loss, const Sample& sample, const Matrix& W,
                   const Vector& alpha) {
  switch (loss.kind) {
    case LossKind::square:
      return square_loss(sample.target, W, alpha);
    case LossKind::logistic:
      return logistic_loss(sample.label, W.col(0), alpha);
    case LossKind::bilinear_logistic:
      return bilinear_logistic_loss(sample.label, sample.x, W, alpha);
    case LossKind::softmax:
      return softmax_loss(sample.label, W, alpha);
  }
  throw std::logic_error("eval_loss: unhandled loss kind");
}

std::pair<Index, Index> loss_w_shape(const TaskLoss& loss, Index p, Index m) {
  switch (loss.kind) {
    case LossKind::square: return {loss.q, p};
    case LossKind::logistic: return {p, 1};
    case LossKind::bilinear_logistic: return {m, p};
    case LossKind::softmax: return {loss.q, p};
  }
  throw std::logic_error("loss_w_shape: unhandled loss kind");
}

}  // namespace taskdict
