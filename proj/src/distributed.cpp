#include "aniso/distributed.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

namespace aniso {

void TrainerConfig::validate() const {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (lambda <= 0 || tau <= 0 || sigma <= 0) {
    throw std::invalid_argument("lambda, tau, sigma must be > 0");
  }
  if (kappa < 0 || kappa >= 1) throw std::invalid_argument("kappa must be in [0,1)");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (worker_threads < 1) throw std::invalid_argument("worker_threads must be >= 1");
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t stream_seed(unsigned seed, int worker, int iteration) {
  uint64_t h = splitmix64(static_cast<uint64_t>(seed));
  h = splitmix64(h ^ static_cast<uint64_t>(worker + 1));
  h = splitmix64(h ^ static_cast<uint64_t>(iteration + 1));
  return h;
}

}  // namespace

std::vector<int> sample_minibatch(const std::vector<int>& shard, int batch_size,
                                  unsigned seed, int worker, int iteration) {
  if (batch_size >= static_cast<int>(shard.size())) return shard;
  std::mt19937_64 rng(stream_seed(seed, worker, iteration));
  std::vector<int> pool = shard;
  std::vector<int> batch(batch_size);
  // Partial Fisher-Yates: uniform without replacement.
  for (int i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    batch[i] = pool[i];
  }
  return batch;
}

Vec worker_delta(const MlpModel& model, const Dataset& data,
                 const std::vector<int>& batch, const Vec& z_j, const Vec& u,
                 const Potential& phi_hat, double lambda) {
  const Vec w = u - z_j;
  if (!phi_hat.in_domain(w)) {
    throw std::domain_error("worker delta: u - z_j outside dom phi");
  }
  auto [loss, grad] = model.loss_grad(z_j, data, batch);
  (void)loss;
  return grad - phi_hat.gradient(w) / lambda;
}

WorkerState momentum_step(const WorkerState& w,
                          const std::function<Vec(const Vec&)>& delta_at,
                          double sigma, double kappa, const Vec& u,
                          const Potential& phi_hat) {
  Vec look = kappa * w.velocity;
  for (int k = 0; k < 50 && !phi_hat.in_domain(u - (w.z + look)); ++k) look *= 0.5;
  if (!phi_hat.in_domain(u - (w.z + look))) {
    throw StepFailure("momentum lookahead infeasible after 50 halvings");
  }
  Vec v_new = look - sigma * delta_at(w.z + look);
  for (int k = 0; k <= 50; ++k) {
    if (phi_hat.in_domain(u - (w.z + v_new))) {
      return WorkerState{w.z + v_new, v_new};
    }
    v_new *= 0.5;
  }
  throw StepFailure("momentum step infeasible after 50 halvings");
}

namespace {

double coupling_value(const Vec& u, const std::vector<WorkerState>& workers,
                      const Potential& phi_hat) {
  double s = 0.0;
  for (const auto& w : workers) {
    const double v = phi_hat.value(u - w.z);
    if (!std::isfinite(v)) return kInf;
    s += v;
  }
  return s;
}

}  // namespace

Vec consensus_update(const Vec& u, const std::vector<WorkerState>& workers,
                     double tau, const Potential& phi_hat, double lambda,
                     bool tau_includes_inv_lambda) {
  Vec grad = Vec::Zero(u.size());
  for (const auto& w : workers) {
    if (!phi_hat.in_domain(u - w.z)) {
      throw std::domain_error("consensus update: u - z_j outside dom phi");
    }
    grad += phi_hat.gradient(u - w.z);
  }
  if (!tau_includes_inv_lambda) grad /= lambda;
  if (grad.norm() == 0.0) return u;
  const double c0 = coupling_value(u, workers, phi_hat);
  double step = tau;
  for (int k = 0; k <= 50; ++k) {
    const Vec trial = u - step * grad;
    const double ct = coupling_value(trial, workers, phi_hat);
    if (std::isfinite(ct) && ct <= c0) return trial;
    step *= 0.5;
  }
  throw StepFailure("consensus line search exhausted 50 halvings");
}

double consensus_gap(const Vec& u, const std::vector<WorkerState>& workers) {
  double gap = 0.0;
  for (const auto& w : workers) {
    gap = std::max(gap, (u - w.z).cwiseAbs().maxCoeff());
  }
  return gap;
}

namespace {

struct LoopCallbacks {
  // Full-shard objective value of worker j at z.
  std::function<double(int, const Vec&)> f_j;
  // Delta producer for worker j at lookahead point z against snapshot u.
  std::function<Vec(int, const Vec&, const Vec&, int)> delta;  // (j, z, u, t)
  std::function<std::optional<double>(const Vec&)> train_loss;
  std::function<std::optional<double>(const Vec&)> train_error;
  std::function<std::optional<double>(const Vec&)> envelope_measure;
};

TrainResult run_loop(const TrainerConfig& cfg, const Potential& phi_hat, Vec u,
                     std::vector<WorkerState> workers, const LoopCallbacks& cb) {
  const int big_m = cfg.workers;
  RunRecord rec;
  rec.columns = {"iter", "F",       "train_loss",        "train_error",
                 "consensus_gap",   "envelope_grad_norm", "wall_ms"};
  const auto t0 = std::chrono::steady_clock::now();

  for (int t = 0; t < cfg.iterations; ++t) {
    const Vec u_prev = u;
    u = consensus_update(u, workers, cfg.tau, phi_hat, cfg.lambda,
                         cfg.tau_includes_inv_lambda);
    const Vec& u_for_delta = cfg.delta_uses_stale_u ? u_prev : u;

    std::vector<WorkerState> next(big_m);
    const int n_threads = std::min(cfg.worker_threads, big_m);
    auto work = [&](int tid) {
      for (int j = tid; j < big_m; j += n_threads) {
        auto delta_at = [&, j](const Vec& z) {
          return cb.delta(j, z, u_for_delta, t);
        };
        next[j] = momentum_step(workers[j], delta_at, cfg.sigma, cfg.kappa, u,
                                phi_hat);
      }
    };
    if (n_threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int tid = 0; tid < n_threads; ++tid) pool.emplace_back(work, tid);
      for (auto& th : pool) th.join();
    }
    workers = std::move(next);

    double f_total = 0.0;
    for (int j = 0; j < big_m; ++j) f_total += cb.f_j(j, workers[j].z);
    f_total += coupling_value(u, workers, phi_hat) / cfg.lambda;

    const int iter = t + 1;
    const bool metrics_now =
        iter % cfg.metrics_every == 0 || iter == cfg.iterations;
    const bool env_now =
        cfg.envelope_every > 0 &&
        (iter % cfg.envelope_every == 0 || iter == cfg.iterations);
    std::optional<double> wall;
    if (cfg.log_wall_time) {
      wall = std::chrono::duration<double, std::milli>(
                 std::chrono::steady_clock::now() - t0)
                 .count();
    }
    rec.add_row({static_cast<double>(iter), f_total,
                 metrics_now ? cb.train_loss(u) : std::nullopt,
                 metrics_now ? cb.train_error(u) : std::nullopt,
                 consensus_gap(u, workers),
                 env_now ? cb.envelope_measure(u) : std::nullopt, wall});
  }
  return {std::move(u), std::move(workers), std::move(rec)};
}

}  // namespace

TrainResult train(const TrainerConfig& cfg, const MlpModel& model,
                  const Dataset& data) {
  cfg.validate();
  const PotentialPtr phi =
      parse_potential_spec(cfg.potential_spec, model.layer_param_shapes());
  MlpModel m = model;
  m.nu = cfg.nu;

  const auto shards = shard_dataset(data, cfg.workers, cfg.shard_mode);
  const Vec u0 = m.init_params(cfg.seed);
  std::vector<WorkerState> workers(cfg.workers);
  for (auto& w : workers) {
    w.z = u0;
    w.velocity = Vec::Zero(u0.size());
  }

  std::vector<int> full(data.size());
  std::iota(full.begin(), full.end(), 0);

  LoopCallbacks cb;
  cb.f_j = [&](int j, const Vec& z) { return m.loss(z, data, shards[j]); };
  cb.delta = [&](int j, const Vec& z, const Vec& u, int t) {
    const std::vector<int> batch =
        cfg.full_batch ? shards[j]
                       : sample_minibatch(shards[j], cfg.batch_size, cfg.seed, j, t);
    return worker_delta(m, data, batch, z, u, *phi, cfg.lambda);
  };
  cb.train_loss = [&](const Vec& u) -> std::optional<double> {
    return m.loss(u, data, full);
  };
  cb.train_error = [&](const Vec& u) -> std::optional<double> {
    return m.error_rate(u, data);
  };
  cb.envelope_measure = [](const Vec&) -> std::optional<double> {
    return std::nullopt;  // grid oracle infeasible at MLP dimension
  };
  return run_loop(cfg, *phi, u0, std::move(workers), cb);
}

TrainResult train(const TrainerConfig& cfg, const TestFunction& f, const Vec& u0) {
  cfg.validate();
  const PotentialPtr phi =
      parse_potential_spec(cfg.potential_spec, {f.dimension});
  if (!f.smooth) throw std::invalid_argument("trainer requires a smooth test function");

  std::vector<WorkerState> workers(cfg.workers);
  for (auto& w : workers) {
    w.z = u0;
    w.velocity = Vec::Zero(u0.size());
  }

  LoopCallbacks cb;
  cb.f_j = [&](int, const Vec& z) { return f.value(z); };
  cb.delta = [&](int, const Vec& z, const Vec& u, int) {
    const Vec w = u - z;
    if (!phi->in_domain(w)) {
      throw std::domain_error("worker delta: u - z_j outside dom phi");
    }
    return Vec(f.grad(z) - phi->gradient(w) / cfg.lambda);
  };
  cb.train_loss = [&](const Vec& u) -> std::optional<double> { return f.value(u); };
  cb.train_error = [](const Vec&) -> std::optional<double> { return std::nullopt; };
  cb.envelope_measure = [&](const Vec& u) -> std::optional<double> {
    ProxProblem pp{objective_from(f), phi, cfg.lambda};
    return prox_local(pp, u).envelope_gradient->norm();
  };
  return run_loop(cfg, *phi, u0, std::move(workers), cb);
}

}  // namespace aniso
