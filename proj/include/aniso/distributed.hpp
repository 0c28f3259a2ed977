#pragma once

#include "aniso/models.hpp"
#include "aniso/prox.hpp"
#include "aniso/run_record.hpp"

namespace aniso {

struct TrainerConfig {
  int workers = 4;
  std::string potential_spec = "quad";
  double lambda = 0.1;
  double tau = 0.01;    // consensus step
  double sigma = 0.05;  // worker step (constant)
  double kappa = 0.0;   // Nesterov momentum, in [0, 1)
  int batch_size = 20;
  int iterations = 100;
  unsigned seed = 1;
  ShardMode shard_mode = ShardMode::full_overlap;
  double nu = 1e-4;

  bool tau_includes_inv_lambda = false;  // tau absorbs 1/lambda in the u-step
  bool delta_uses_stale_u = false;       // worker delta against u^t instead of u^{t+1}
  bool full_batch = false;               // deterministic mode: batch = whole shard
  int metrics_every = 50;                // full-set loss/error cadence
  int envelope_every = 0;                // envelope measure cadence (test functions)
  int worker_threads = 1;
  bool log_wall_time = false;            // keep RunRecord deterministic by default

  void validate() const;
};

struct WorkerState {
  Vec z;
  Vec velocity;
};

struct TrainResult {
  Vec u;
  std::vector<WorkerState> workers;
  RunRecord record;
};

struct StepFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform minibatch of the shard without replacement, deterministic in
/// (seed, worker, iteration) and independent of thread scheduling.
std::vector<int> sample_minibatch(const std::vector<int>& shard, int batch_size,
                                  unsigned seed, int worker, int iteration);

/// Per-worker stochastic delta: minibatch loss gradient
/// (including the regularizer) minus (1/lambda) grad phi_hat(u - z_j).
Vec worker_delta(const MlpModel& model, const Dataset& data,
                 const std::vector<int>& batch, const Vec& z_j, const Vec& u,
                 const Potential& phi_hat, double lambda);

/// Nesterov update: v' = kappa v - sigma Delta(z + kappa v); z' = z + v',
/// with a feasibility backstop halving v' until u - z' stays in dom phi_hat.
/// kappa = 0 reduces to a plain SGD step.
WorkerState momentum_step(const WorkerState& w,
                          const std::function<Vec(const Vec&)>& delta_at,
                          double sigma, double kappa, const Vec& u,
                          const Potential& phi_hat);

/// u' = u - tau_eff sum_j grad phi_hat(u - z_j) with a feasibility line
/// search on the coupling part of F.
Vec consensus_update(const Vec& u, const std::vector<WorkerState>& workers,
                     double tau, const Potential& phi_hat, double lambda,
                     bool tau_includes_inv_lambda);

double consensus_gap(const Vec& u, const std::vector<WorkerState>& workers);

/// Synchronous distributed training of the MLP on the dataset.
TrainResult train(const TrainerConfig& cfg, const MlpModel& model, const Dataset& data);

/// Same loop on a smooth test function (deterministic f_j = f); logs the
/// envelope-gradient stationarity measure at the configured cadence.
TrainResult train(const TrainerConfig& cfg, const TestFunction& f, const Vec& u0);

}  // namespace aniso
