#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "taskdict/elastic_net.hpp"
#include "taskdict/gradients.hpp"
#include "taskdict/losses.hpp"
#include "taskdict/sampler.hpp"
#include "taskdict/types.hpp"

namespace taskdict {

/// Hyperparameters of the projected stochastic gradient loop. The learning
/// rate is rho for the first t0 iterations and rho * t0 / t afterwards.
struct TrainConfig {
  double lambda1 = 0.15;  // elastic-net l1 weight
  double lambda2 = 0.01;  // elastic-net l2 weight
  double nu_w = 1e-9;     // ridge weight on W
  double nu_z = 0.0;      // ridge weight on Z
  double rho = 1.0;       // base learning rate
  long t0 = 0;            // annealing knee; 0 selects T/10
  long iterations = 1000; // T
  int batch = 200;        // samples per iteration (eta)
  double mu = 0.0;        // semi-supervised mixing weight in [0, 1]
  double w_radius = 0.0;  // >0 constrains W to a Frobenius ball of this radius
  std::uint64_t seed = 0;
  int threads = 1;
  double divergence_factor = 1e3;
  int max_active = 0;     // forwarded to the coder; 0 keeps its default
  double kkt_tol = 1e-6;

  void validate() const;
  ElasticNetParams coding_params() const;
  long knee() const;
};

struct TelemetryPoint {
  long iteration = 0;
  double objective = 0.0;  // moving-average objective estimate
  double rate = 0.0;
};

/// A trained (D, W[, Z]) triple, the loss it was trained for, the
/// configuration that produced it, and per-iteration telemetry.
struct TrainedModel {
  Dictionary dict;
  Matrix w;
  std::optional<Matrix> z;
  TaskLoss loss;
  TrainConfig config;
  std::vector<TelemetryPoint> telemetry;
};

struct IterationState {
  long iteration;
  double rate;
  double objective_estimate;
  const TrainedModel& model;
};
using TrainObserver = std::function<void(const IterationState&)>;

/// Rescales every atom with norm > 1 to norm exactly 1; shorter atoms are
/// untouched. Orthogonal projection onto the feasible set, hence idempotent.
Dictionary project_dictionary(Dictionary D);

/// Projection onto the Frobenius ball of the given radius; radius <= 0 means
/// unconstrained and returns the input unchanged.
Matrix project_frobenius_ball(Matrix M, double radius);

/// min(rho, rho * t0 / t) for t >= 1.
double learning_rate(long t, double rho, long t0);

struct UnsupervisedInitOptions {
  int batch = 256;
  double rho = 0.5;
  int threads = 1;
};

/// Unsupervised initialization: seeds the atoms with p distinct normalized
/// training signals, then runs `passes` epochs of projected mini-batch
/// gradient descent on the reconstruction objective.
Dictionary init_unsupervised(SampleStream& data, Index p, const ElasticNetParams& coding,
                             int passes, const UnsupervisedInitOptions& opts = {});

/// Fits W on fixed codes: ridge normal equations for the square loss,
/// gradient descent (Lipschitz step size) to gradient norm <= 1e-6 or an
/// iteration cap for the log-losses. Codes are computed once per sample.
Matrix warm_start_w(const Dictionary& D, const std::vector<Sample>& data,
                    const TaskLoss& loss, double nu, const ElasticNetParams& coding,
                    const std::optional<Matrix>& Z = std::nullopt, int threads = 1);

/// Projected stochastic gradient descent over (D, W[, Z]) starting from
/// `init`. Each iteration draws `batch` labeled samples (and as many
/// unlabeled ones when mu > 0), averages the per-sample gradients, and takes
/// projected steps. Deterministic for a fixed seed and config, regardless of
/// the thread count. Throws DivergenceError when the running objective
/// estimate exceeds divergence_factor times its initial value.
TrainedModel train(const TaskLoss& loss, SampleStream& labeled, SampleStream* unlabeled,
                   const TrainConfig& cfg, TrainedModel init,
                   const TrainObserver& observer = {});

/// Trains one stage per mu value (descending), warm-starting each stage from
/// the previous stage's parameters. Returns one model per stage.
std::vector<TrainedModel> continuation_schedule(const TaskLoss& loss, SampleStream& labeled,
                                                SampleStream* unlabeled, const TrainConfig& cfg,
                                                const std::vector<double>& mu_values,
                                                TrainedModel init,
                                                const TrainObserver& observer = {});

}  // namespace taskdict
