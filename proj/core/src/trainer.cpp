#include "taskdict/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "taskdict/errors.hpp"
#include "taskdict/parallel.hpp"

namespace taskdict {

namespace {

// Mean over the most recent `capacity` pushed values.
class MovingAverage {
 public:
  explicit MovingAverage(std::size_t capacity) : capacity_(capacity) {}

  void push(double v) {
    values_.push_back(v);
    sum_ += v;
    if (values_.size() > capacity_) {
      sum_ -= values_.front();
      values_.pop_front();
    }
  }

  double mean() const {
    return values_.empty() ? 0.0 : sum_ / static_cast<double>(values_.size());
  }

 private:
  std::size_t capacity_;
  std::deque<double> values_;
  double sum_ = 0.0;
};

// Code stored as (index, value) pairs; warm starts keep many of them alive.
struct CompactCode {
  std::vector<int> idx;
  std::vector<double> val;
};

CompactCode compact(const SparseCode& code) {
  CompactCode c;
  c.idx = code.active;
  c.val.reserve(code.active.size());
  for (const int j : code.active) c.val.push_back(code.alpha(j));
  return c;
}

double compact_dot(const CompactCode& c, const Eigen::Ref<const Vector>& w) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.idx.size(); ++k) s += c.val[k] * w(c.idx[k]);
  return s;
}

double compact_sqnorm(const CompactCode& c) {
  double s = 0.0;
  for (const double v : c.val) s += v * v;
  return s;
}

double sigmoid_neg(double t) {
  if (t > 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

Vector unit_or_zero(Vector v) {
  const double n = v.norm();
  if (n > 1e-10) v /= n;
  else v.setZero();
  return v;
}

Matrix encoder_inputs(const std::vector<const Sample*>& samples, const std::optional<Matrix>& Z,
                      Index enc_dim) {
  Matrix X(enc_dim, static_cast<Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (Z) X.col(static_cast<Index>(i)) = *Z * samples[i]->x;
    else X.col(static_cast<Index>(i)) = samples[i]->x;
  }
  return X;
}

// Ridge normal equations for the square loss, accumulated sample by sample so
// large datasets never materialize a dense code matrix.
Matrix warm_start_square(const Dictionary& D, const std::vector<Sample>& data, Index q,
                         double nu, const ElasticNetParams& coding,
                         const std::optional<Matrix>& Z, int threads) {
  const Index p = D.atom_count();
  Matrix S = Matrix::Zero(p, p);  // (1/n) sum alpha alpha^T
  Matrix B = Matrix::Zero(q, p);  // (1/n) sum y alpha^T

  const std::size_t chunk = 1024;
  std::vector<const Sample*> buf;
  buf.reserve(chunk);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    const std::size_t stop = std::min(data.size(), start + chunk);
    buf.clear();
    for (std::size_t i = start; i < stop; ++i) buf.push_back(&data[i]);
    const Matrix X = encoder_inputs(buf, Z, D.signal_dim());
    const auto codes = batch_solve(X, D, coding, threads);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const Sample& s = *buf[i];
      if (s.target.size() != q) {
        throw std::invalid_argument("warm_start_w: target length does not match q");
      }
      const CompactCode c = compact(codes[i]);
      for (std::size_t a = 0; a < c.idx.size(); ++a) {
        for (std::size_t b = 0; b < c.idx.size(); ++b) {
          S(c.idx[a], c.idx[b]) += inv_n * c.val[a] * c.val[b];
        }
        B.col(c.idx[a]) += (inv_n * c.val[a]) * s.target;
      }
    }
  }

  S.diagonal().array() += nu;
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "warm_start_w: singular normal equations; use nu > 0");
  }
  return llt.solve(B.transpose()).transpose();
}

// Gradient descent with a Lipschitz step size for the log-losses, run until
// the gradient norm reaches 1e-6 or the iteration cap.
Matrix warm_start_descent(const Dictionary& D, const std::vector<Sample>& data,
                          const TaskLoss& loss, double nu, const ElasticNetParams& coding,
                          const std::optional<Matrix>& Z, int threads) {
  const Index p = D.atom_count();
  const Index m = data.front().x.size();
  const auto [wr, wc] = loss_w_shape(loss, p, m);

  std::vector<CompactCode> codes(data.size());
  {
    const std::size_t chunk = 1024;
    std::vector<const Sample*> buf;
    for (std::size_t start = 0; start < data.size(); start += chunk) {
      const std::size_t stop = std::min(data.size(), start + chunk);
      buf.clear();
      for (std::size_t i = start; i < stop; ++i) buf.push_back(&data[i]);
      const Matrix X = encoder_inputs(buf, Z, D.signal_dim());
      const auto solved = batch_solve(X, D, coding, threads);
      for (std::size_t i = 0; i < solved.size(); ++i) codes[start + i] = compact(solved[i]);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(data.size());
  double lipschitz = nu;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double a2 = compact_sqnorm(codes[i]);
    switch (loss.kind) {
      case LossKind::logistic: lipschitz += 0.25 * inv_n * a2; break;
      case LossKind::bilinear_logistic:
        lipschitz += 0.25 * inv_n * a2 * data[i].x.squaredNorm();
        break;
      case LossKind::softmax: lipschitz += 0.5 * inv_n * a2; break;
      default: throw std::logic_error("warm_start_descent: unsupported loss");
    }
  }
  const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  Matrix W = Matrix::Zero(wr, wc);
  Matrix grad(wr, wc);
  const int max_iters = 5000;
  for (int it = 0; it < max_iters; ++it) {
    grad = nu * W;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const CompactCode& c = codes[i];
      const int y = data[i].label;
      switch (loss.kind) {
        case LossKind::logistic: {
          const double t = y * compact_dot(c, W.col(0));
          const double wgt = -y * sigmoid_neg(t) * inv_n;
          for (std::size_t k = 0; k < c.idx.size(); ++k) grad(c.idx[k], 0) += wgt * c.val[k];
          break;
        }
        case LossKind::bilinear_logistic: {
          double t = 0.0;
          for (std::size_t k = 0; k < c.idx.size(); ++k) {
            t += c.val[k] * data[i].x.dot(W.col(c.idx[k]));
          }
          t *= y;
          const double wgt = -y * sigmoid_neg(t) * inv_n;
          for (std::size_t k = 0; k < c.idx.size(); ++k) {
            grad.col(c.idx[k]) += (wgt * c.val[k]) * data[i].x;
          }
          break;
        }
        case LossKind::softmax: {
          Vector scores = Vector::Zero(wr);
          for (std::size_t k = 0; k < c.idx.size(); ++k) {
            scores += c.val[k] * W.col(c.idx[k]);
          }
          const double top = scores.maxCoeff();
          Vector probs = (scores.array() - top).exp();
          probs /= probs.sum();
          probs(y - 1) -= 1.0;
          for (std::size_t k = 0; k < c.idx.size(); ++k) {
            grad.col(c.idx[k]) += (inv_n * c.val[k]) * probs;
          }
          break;
        }
        default: throw std::logic_error("warm_start_descent: unsupported loss");
      }
    }
    if (grad.norm() <= 1e-6) break;
    W -= step * grad;
  }
  return W;
}

}  // namespace

void TrainConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0) throw std::invalid_argument("train: lambdas must be >= 0");
  if (rho < 0.0) throw std::invalid_argument("train: rho must be >= 0");
  if (iterations < 0) throw std::invalid_argument("train: iterations must be >= 0");
  if (batch < 1) throw std::invalid_argument("train: batch must be >= 1");
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("train: mu must be in [0, 1]");
  if (t0 < 0) throw std::invalid_argument("train: t0 must be >= 0");
  if (nu_w < 0.0 || nu_z < 0.0) throw std::invalid_argument("train: ridge weights must be >= 0");
  if (divergence_factor <= 1.0) {
    throw std::invalid_argument("train: divergence_factor must be > 1");
  }
}

ElasticNetParams TrainConfig::coding_params() const {
  ElasticNetParams p;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.tol = kkt_tol;
  p.max_active = max_active;
  return p;
}

long TrainConfig::knee() const { return t0 > 0 ? t0 : std::max<long>(1, iterations / 10); }

Dictionary project_dictionary(Dictionary D) {
  for (Index j = 0; j < D.atoms.cols(); ++j) {
    const double n2 = D.atoms.col(j).squaredNorm();
    if (n2 > 1.0) D.atoms.col(j) /= std::sqrt(n2);
  }
  return D;
}

Matrix project_frobenius_ball(Matrix M, double radius) {
  if (radius <= 0.0) return M;
  const double n = M.norm();
  if (n > radius) M *= radius / n;
  return M;
}

double learning_rate(long t, double rho, long t0) {
  if (t < 1) throw std::invalid_argument("learning_rate: t must be >= 1");
  return std::min(rho, rho * static_cast<double>(t0) / static_cast<double>(t));
}

Dictionary init_unsupervised(SampleStream& data, Index p, const ElasticNetParams& coding,
                             int passes, const UnsupervisedInitOptions& opts) {
  coding.validate();
  if (p < 1) throw std::invalid_argument("init_unsupervised: p must be >= 1");
  if (passes < 0) throw std::invalid_argument("init_unsupervised: passes must be >= 0");
  if (static_cast<Index>(data.size()) < p) {
    throw DataError("init_unsupervised: dataset has " + std::to_string(data.size()) +
                    " signals, needs at least p = " + std::to_string(p));
  }

  Vector first = data.next().x;
  const Index m = first.size();
  Dictionary D;
  D.atoms.resize(m, p);
  D.atoms.col(0) = unit_or_zero(std::move(first));
  for (Index j = 1; j < p; ++j) D.atoms.col(j) = unit_or_zero(data.next().x);
  if (passes == 0) return D;

  const long steps_per_pass =
      static_cast<long>((data.size() + static_cast<std::size_t>(opts.batch) - 1) /
                        static_cast<std::size_t>(opts.batch));
  const long total_steps = passes * std::max<long>(1, steps_per_pass);
  const long knee = std::max<long>(1, total_steps / 10);

  std::vector<const Sample*> batch;
  batch.reserve(static_cast<std::size_t>(opts.batch));
  Matrix grad(m, p);
  for (long t = 1; t <= total_steps; ++t) {
    batch.clear();
    for (int i = 0; i < opts.batch; ++i) batch.push_back(&data.next());
    const Matrix X = encoder_inputs(batch, std::nullopt, m);
    const auto codes = batch_solve(X, D, coding, opts.threads);

    grad.setZero();
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const Vector residual = X.col(static_cast<Index>(i)) - D.atoms * codes[i].alpha;
      for (const int j : codes[i].active) {
        grad.col(j) -= (inv_b * codes[i].alpha(j)) * residual;
      }
    }
    const double rate = learning_rate(t, opts.rho, knee);
    D.atoms -= rate * grad;
    D = project_dictionary(std::move(D));
  }
  return D;
}

Matrix warm_start_w(const Dictionary& D, const std::vector<Sample>& data, const TaskLoss& loss,
                    double nu, const ElasticNetParams& coding, const std::optional<Matrix>& Z,
                    int threads) {
  coding.validate();
  D.require_feasible("warm_start_w");
  if (data.empty()) throw DataError("warm_start_w: empty dataset");
  if (nu < 0.0) throw std::invalid_argument("warm_start_w: nu must be >= 0");

  if (loss.kind == LossKind::square) {
    return warm_start_square(D, data, loss.q, nu, coding, Z, threads);
  }
  return warm_start_descent(D, data, loss, nu, coding, Z, threads);
}

TrainedModel train(const TaskLoss& loss, SampleStream& labeled, SampleStream* unlabeled,
                   const TrainConfig& cfg, TrainedModel init, const TrainObserver& observer) {
  cfg.validate();
  TrainedModel model = std::move(init);
  model.loss = loss;
  model.config = cfg;
  model.telemetry.clear();
  model.dict.require_feasible("train");
  const bool semi = cfg.mu > 0.0;
  if (semi && unlabeled == nullptr) {
    throw std::invalid_argument("train: mu > 0 requires an unlabeled stream");
  }

  const ElasticNetParams coding = cfg.coding_params();
  const Index enc_dim = model.dict.signal_dim();
  const Index p = model.dict.atom_count();
  const long knee = cfg.knee();

  MovingAverage sup_avg(1000), unsup_avg(1000);
  double initial_estimate = -1.0;
  bool have_initial = false;

  std::vector<const Sample*> batch(static_cast<std::size_t>(cfg.batch));
  std::vector<const Sample*> unsup_batch;
  std::vector<SampleGradients> slots(static_cast<std::size_t>(cfg.batch));

  Matrix grad_w(model.w.rows(), model.w.cols());
  Matrix grad_d(enc_dim, p);
  Matrix grad_d_unsup(enc_dim, p);
  Matrix grad_z;
  if (model.z) grad_z.resize(model.z->rows(), model.z->cols());

  for (long t = 1; t <= cfg.iterations; ++t) {
    const double rate = learning_rate(t, cfg.rho, knee);
    for (int i = 0; i < cfg.batch; ++i) batch[static_cast<std::size_t>(i)] = &labeled.next();
    if (semi) {
      unsup_batch.clear();
      for (int i = 0; i < cfg.batch; ++i) unsup_batch.push_back(&unlabeled->next());
    }

    const Matrix X = encoder_inputs(batch, model.z, enc_dim);
    const auto codes = batch_solve(X, model.dict, coding, cfg.threads);

    parallel_for(batch.size(), cfg.threads, [&](std::size_t i) {
      slots[i] = grad_sample(loss, *batch[i], model.w, model.dict, model.z, codes[i]);
    });

    grad_w.setZero();
    grad_d.setZero();
    if (model.z) grad_z.setZero();
    double sup_value = 0.0;
    const double inv_b = 1.0 / static_cast<double>(cfg.batch);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      grad_w += slots[i].grad_w;
      grad_d += slots[i].grad_d;
      if (model.z) grad_z += *slots[i].grad_z;
      sup_value += slots[i].loss_value;
    }
    grad_w *= inv_b;
    grad_d *= inv_b;
    if (model.z) grad_z *= inv_b;
    sup_avg.push(sup_value * inv_b);

    if (semi) {
      const Matrix Xu = encoder_inputs(unsup_batch, std::nullopt, enc_dim);
      const auto unsup_codes = batch_solve(Xu, model.dict, coding, cfg.threads);
      grad_d_unsup.setZero();
      double unsup_value = 0.0;
      for (std::size_t i = 0; i < unsup_codes.size(); ++i) {
        const Vector residual = Xu.col(static_cast<Index>(i)) -
                                model.dict.atoms * unsup_codes[i].alpha;
        for (const int j : unsup_codes[i].active) {
          grad_d_unsup.col(j) -= (inv_b * unsup_codes[i].alpha(j)) * residual;
        }
        unsup_value += unsup_codes[i].objective;
      }
      unsup_avg.push(unsup_value * inv_b);
      grad_d = (1.0 - cfg.mu) * grad_d + cfg.mu * grad_d_unsup;
    }

    model.w = project_frobenius_ball(model.w - rate * (grad_w + cfg.nu_w * model.w),
                                     cfg.w_radius);
    model.dict.atoms -= rate * grad_d;
    model.dict = project_dictionary(std::move(model.dict));
    if (model.z) {
      *model.z -= rate * (grad_z + cfg.nu_z * *model.z);
    }

    const double estimate = semi ? (1.0 - cfg.mu) * sup_avg.mean() + cfg.mu * unsup_avg.mean()
                                 : sup_avg.mean();
    if (!have_initial) {
      initial_estimate = estimate;
      have_initial = true;
    } else if (estimate > cfg.divergence_factor * std::max(initial_estimate, 1e-12)) {
      throw DivergenceError("train: objective estimate " + std::to_string(estimate) +
                            " exceeds " + std::to_string(cfg.divergence_factor) +
                            "x its initial value " + std::to_string(initial_estimate) +
                            "; lower rho (currently " + std::to_string(cfg.rho) + ")");
    }
    model.telemetry.push_back({t, estimate, rate});
    if (observer) observer(IterationState{t, rate, estimate, model});
  }
  return model;
}

std::vector<TrainedModel> continuation_schedule(const TaskLoss& loss, SampleStream& labeled,
                                                SampleStream* unlabeled, const TrainConfig& cfg,
                                                const std::vector<double>& mu_values,
                                                TrainedModel init,
                                                const TrainObserver& observer) {
  if (mu_values.empty()) {
    throw std::invalid_argument("continuation_schedule: empty mu list");
  }
  for (std::size_t i = 1; i < mu_values.size(); ++i) {
    if (mu_values[i] > mu_values[i - 1]) {
      throw std::invalid_argument("continuation_schedule: mu values must be descending");
    }
  }
  std::vector<TrainedModel> stages;
  stages.reserve(mu_values.size());
  TrainedModel current = std::move(init);
  for (const double mu : mu_values) {
    TrainConfig stage_cfg = cfg;
    stage_cfg.mu = mu;
    current = train(loss, labeled, mu > 0.0 ? unlabeled : nullptr, stage_cfg,
                    std::move(current), observer);
    stages.push_back(current);
  }
  return stages;
}

}  // namespace taskdict
