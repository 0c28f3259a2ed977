#include "doctest.h"

#include "aniso/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace aniso;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v[0] = a;
  return v;
}

std::vector<int> iota_shard(int n) {
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

}  // namespace

TEST_CASE("minibatch sampling is deterministic and without replacement") {
  const auto shard = iota_shard(10);
  const auto a = sample_minibatch(shard, 4, 7, 2, 13);
  const auto b = sample_minibatch(shard, 4, 7, 2, 13);
  CHECK(a == b);
  REQUIRE(a.size() == 4);
  const std::set<int> uniq(a.begin(), a.end());
  CHECK(uniq.size() == 4);
  for (int i : a) CHECK((i >= 0 && i < 10));

  CHECK(sample_minibatch(shard, 4, 7, 2, 14) != a);  // streams differ per iteration
  CHECK(sample_minibatch(shard, 4, 7, 3, 13) != a);  // and per worker
  CHECK(sample_minibatch(shard, 10, 7, 0, 0) == shard);
  CHECK(sample_minibatch(shard, 99, 7, 0, 0) == shard);
}

TEST_CASE("minibatch element frequencies are uniform") {
  const auto shard = iota_shard(10);
  std::vector<int> count(10, 0);
  const int draws = 5000;
  for (int t = 0; t < draws; ++t) {
    for (int i : sample_minibatch(shard, 3, 11, 0, t)) ++count[i];
  }
  for (int c : count) {
    CHECK(std::abs(c - draws * 3 / 10) <= 160);  // ~5 sigma for Bin(5000, 0.3)
  }
}

TEST_CASE("average over all equal-size minibatches is the full gradient") {
  MlpModel m{{2, 4, 2}, 0.0};
  const Dataset d = synth_dataset(DatasetKind::two_gaussians, 6, 0.3, 3);
  const Vec z = m.init_params(5);
  const Vec full = m.loss_grad(z, d, iota_shard(6)).second;
  Vec mean = Vec::Zero(z.size());
  int count = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      for (int k = j + 1; k < 6; ++k) {
        mean += m.loss_grad(z, d, {i, j, k}).second;
        ++count;
      }
    }
  }
  CHECK(count == 20);
  CHECK((mean / count - full).norm() <= 1e-12);
}

TEST_CASE("worker delta") {
  MlpModel m{{2, 4, 2}, 1e-3};
  const Dataset d = synth_dataset(DatasetKind::two_gaussians, 8, 0.3, 4);
  const auto batch = iota_shard(8);
  const Vec u = m.init_params(6);
  const PotentialPtr phi =
      parse_potential_spec("quad", m.layer_param_shapes());

  // At z_j = u the coupling gradient vanishes: delta is the plain gradient.
  const Vec at_u = worker_delta(m, d, batch, u, u, *phi, 0.1);
  CHECK((at_u - m.loss_grad(u, d, batch).second).norm() <= 1e-14);

  // General point: delta = grad - (1/lambda) grad phi(u - z).
  const Vec z = u + Vec::Constant(u.size(), 0.2);
  const Vec delta = worker_delta(m, d, batch, z, u, *phi, 0.5);
  const Vec expect =
      m.loss_grad(z, d, batch).second - phi->gradient(u - z) / 0.5;
  CHECK((delta - expect).norm() <= 1e-14);

  const PotentialPtr logp =
      parse_potential_spec("log_sep", m.layer_param_shapes());
  const Vec far = u + Vec::Constant(u.size(), 2.0);
  CHECK_THROWS_AS(worker_delta(m, d, batch, far, u, *logp, 0.5), std::domain_error);
}

TEST_CASE("momentum step reductions") {
  BasePotential quad(PotentialKind::quad, 1);
  const auto identity_delta = [](const Vec& z) { return z; };

  // kappa = 0 is a plain gradient step.
  WorkerState w{vec1(2.0), vec1(5.0)};  // stale velocity must be ignored
  const WorkerState s = momentum_step(w, identity_delta, 0.1, 0.0, vec1(0.0), quad);
  CHECK(s.z[0] == doctest::Approx(2.0 - 0.1 * 2.0));
  CHECK(s.velocity[0] == doctest::Approx(-0.2));

  // Zero delta coasts on the velocity.
  const auto zero_delta = [](const Vec& z) { return Vec::Zero(z.size()).eval(); };
  WorkerState c{vec1(1.0), vec1(0.5)};
  const WorkerState sc = momentum_step(c, zero_delta, 0.1, 0.8, vec1(0.0), quad);
  CHECK(sc.velocity[0] == doctest::Approx(0.4));
  CHECK(sc.z[0] == doctest::Approx(1.4));
}

TEST_CASE("momentum recursion matches a hand-rolled scalar loop") {
  BasePotential quad(PotentialKind::quad, 1);
  const auto identity_delta = [](const Vec& z) { return z; };
  const double sigma = 0.05, kappa = 0.9;
  WorkerState w{vec1(1.0), vec1(0.0)};
  double z = 1.0, v = 0.0;
  for (int t = 0; t < 50; ++t) {
    w = momentum_step(w, identity_delta, sigma, kappa, vec1(0.0), quad);
    const double vn = kappa * v - sigma * (z + kappa * v);
    z += vn;
    v = vn;
    CHECK(w.z[0] == doctest::Approx(z).epsilon(1e-14));
    CHECK(w.velocity[0] == doctest::Approx(v).epsilon(1e-14));
  }
  CHECK(std::abs(z) < 1.0);  // contraction toward the minimizer
}

TEST_CASE("momentum step halves itself feasible near a domain boundary") {
  BasePotential logp(PotentialKind::log, 1);
  const auto big_delta = [](const Vec& z) { return Vec::Constant(z.size(), 100.0).eval(); };
  WorkerState w{vec1(0.0), vec1(0.0)};
  const WorkerState s = momentum_step(w, big_delta, 1.0, 0.0, vec1(0.5), logp);
  CHECK(logp.in_domain(vec1(0.5) - s.z));
  CHECK(s.z[0] < 0.0);  // moved, but by a halved velocity
}

TEST_CASE("consensus update with quad potential and tau = lambda/M is the mean") {
  std::vector<WorkerState> workers;
  for (double zj : {1.0, 2.0, 6.0, 7.0}) workers.push_back({vec1(zj), vec1(0.0)});
  BasePotential quad(PotentialKind::quad, 1);
  const Vec u = consensus_update(vec1(0.0), workers, 0.1 / 4.0, quad, 0.1, false);
  CHECK(std::abs(u[0] - 4.0) <= 1e-12);

  // The mean is a fixed point.
  CHECK(consensus_update(vec1(4.0), workers, 0.1 / 4.0, quad, 0.1, false)[0] == 4.0);

  // Literal scaling: tau multiplies the raw coupling gradient.
  const Vec lit = consensus_update(vec1(0.0), workers, 0.25, quad, 0.1, true);
  CHECK(std::abs(lit[0] - 4.0) <= 1e-12);
}

TEST_CASE("symmetric workers leave the consensus point fixed") {
  BasePotential logsep(PotentialKind::log_sep, 1);
  std::vector<WorkerState> workers{{vec1(0.6), vec1(0.0)}, {vec1(-0.6), vec1(0.0)}};
  CHECK(consensus_update(vec1(0.0), workers, 0.1, logsep, 1.0, false)[0] == 0.0);
}

TEST_CASE("consensus gap") {
  std::vector<WorkerState> workers{{vec1(1.0), vec1(0.0)}, {vec1(-2.0), vec1(0.0)}};
  CHECK(consensus_gap(vec1(0.5), workers) == doctest::Approx(2.5));
  Vec u2(2), z2(2);
  u2 << 0.0, 0.0;
  z2 << 0.3, -0.9;
  CHECK(consensus_gap(u2, {{z2, Vec::Zero(2)}}) == doctest::Approx(0.9));
}

TEST_CASE("config validation") {
  TrainerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.kappa = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.kappa = 0.5;
  cfg.workers = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.workers = 2;
  cfg.sigma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("single worker without momentum matches a hand-rolled loop") {
  TrainerConfig cfg;
  cfg.workers = 1;
  cfg.potential_spec = "quad";
  cfg.lambda = 0.1;
  cfg.tau = 0.05;
  cfg.sigma = 0.05;
  cfg.kappa = 0.0;
  cfg.iterations = 100;
  cfg.full_batch = true;
  const TestFunction f = make_test_function("quadratic");
  const TrainResult r = train(cfg, f, vec1(1.0));

  double u = 1.0, z = 1.0;
  for (int t = 0; t < cfg.iterations; ++t) {
    u -= cfg.tau / cfg.lambda * (u - z);          // consensus step, full step accepted
    z -= cfg.sigma * (z - (u - z) / cfg.lambda);  // worker step against fresh u
  }
  CHECK(r.u[0] == doctest::Approx(u).epsilon(1e-14));
  CHECK(r.workers[0].z[0] == doctest::Approx(z).epsilon(1e-14));
}

TEST_CASE("trainer on a strongly convex function reaches consensus stationarity") {
  TrainerConfig cfg;
  cfg.workers = 4;
  cfg.potential_spec = "quad";
  cfg.lambda = 0.05;
  cfg.tau = 0.01;
  cfg.sigma = 0.02;
  cfg.kappa = 0.5;
  cfg.iterations = 3000;
  cfg.full_batch = true;
  cfg.envelope_every = 500;
  const TestFunction f = make_test_function("quadratic");
  const TrainResult r = train(cfg, f, vec1(2.0));
  CHECK(consensus_gap(r.u, r.workers) <= 1e-8);
  CHECK(std::abs(f.grad(r.u)[0]) <= 1e-8);
  REQUIRE(r.record.last("envelope_grad_norm").has_value());
  CHECK(*r.record.last("envelope_grad_norm") <= 1e-7);
  REQUIRE(r.record.last("F").has_value());
  CHECK(std::isfinite(*r.record.last("F")));
}

TEST_CASE("records are byte-identical across worker thread counts") {
  MlpModel m{{2, 8, 2}, 1e-4};
  const Dataset d = synth_dataset(DatasetKind::two_gaussians, 40, 0.3, 2);
  std::string first;
  for (int threads : {1, 2, 4}) {
    TrainerConfig cfg;
    cfg.workers = 4;
    cfg.potential_spec = "quad";
    cfg.lambda = 0.1;
    cfg.tau = 0.02;
    cfg.sigma = 0.05;
    cfg.kappa = 0.9;
    cfg.batch_size = 5;
    cfg.iterations = 30;
    cfg.seed = 17;
    cfg.metrics_every = 10;
    cfg.worker_threads = threads;
    const std::string csv = train(cfg, m, d).record.to_csv();
    if (first.empty()) {
      first = csv;
    } else {
      CHECK(csv == first);
    }
  }
  CHECK_FALSE(first.empty());
}
