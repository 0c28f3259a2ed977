#include "doctest.h"

#include "aniso/models.hpp"
#include "aniso/oracle.hpp"

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
}  // namespace

TEST_CASE("test function evaluation and kinks") {
  const TestFunction absf = make_test_function("abs");
  auto [v, g] = testfn_eval(absf, vec1(-3.0));
  CHECK(v == doctest::Approx(3.0));
  REQUIRE(g.has_value());
  CHECK((*g)[0] == doctest::Approx(-1.0));
  CHECK_FALSE(testfn_eval(absf, vec1(0.0)).second.has_value());

  const TestFunction nc = make_test_function("neg_cos");
  auto [vc, gc] = testfn_eval(nc, vec1(0.0));
  CHECK(vc == doctest::Approx(-1.0));
  CHECK((*gc)[0] == doctest::Approx(0.0));

  const TestFunction dw = make_test_function("double_well");
  auto [vd, gd] = testfn_eval(dw, vec1(1.0));
  CHECK(vd == doctest::Approx(0.0));
  CHECK((*gd)[0] == doctest::Approx(0.0));

  const TestFunction ind = make_test_function("two_point_indicator");
  CHECK(ind.value(vec1(0.0)) == 0.0);
  CHECK(ind.value(vec1(1.0)) == 0.0);
  CHECK(ind.value(vec1(0.5)) == kInf);
  CHECK_FALSE(testfn_eval(ind, vec1(0.0)).second.has_value());
}

TEST_CASE("test function gradients match finite differences") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const std::string& name : test_function_names()) {
    const TestFunction f = make_test_function(name);
    if (!f.smooth) continue;
    for (int i = 0; i < 50; ++i) {
      Vec z(f.dimension);
      for (int k = 0; k < f.dimension; ++k) z[k] = u(rng);
      const Vec g = f.grad(z);
      const Vec fd = finite_diff_gradient(f.value, z, 1e-6);
      CHECK((g - fd).norm() <= 1e-5 * (1.0 + g.norm()));
    }
  }
}

TEST_CASE("declared lower bounds hold on samples") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const std::string& name : test_function_names()) {
    const TestFunction f = make_test_function(name);
    CHECK(f.lower_bound > -kInf);  // every library member is bounded below
    for (int i = 0; i < 100; ++i) {
      Vec z(f.dimension);
      for (int k = 0; k < f.dimension; ++k) z[k] = u(rng);
      CHECK(f.value(z) >= f.lower_bound);
    }
  }
}

TEST_CASE("synthetic datasets") {
  const Dataset d0 = synth_dataset(DatasetKind::two_gaussians, 4, 0.0, 42);
  REQUIRE(d0.size() == 4);
  CHECK(d0.inputs[0][0] == doctest::Approx(-1.0));
  CHECK(d0.inputs[3][0] == doctest::Approx(1.0));
  CHECK(d0.labels == std::vector<int>{0, 0, 1, 1});

  const Dataset a = synth_dataset(DatasetKind::two_moons, 50, 0.1, 9);
  const Dataset b = synth_dataset(DatasetKind::two_moons, 50, 0.1, 9);
  for (int i = 0; i < a.size(); ++i) {
    CHECK((a.inputs[i] - b.inputs[i]).norm() == 0.0);
  }

  // Balanced classes floor/ceil.
  const Dataset odd = synth_dataset(DatasetKind::two_gaussians, 7, 0.2, 1);
  const int c0 = static_cast<int>(std::count(odd.labels.begin(), odd.labels.end(), 0));
  CHECK(c0 == 3);
}

TEST_CASE("two_gaussians n=200 noise=0.3 is separable by a linear baseline") {
  // Plain gradient descent on logistic regression as the oracle.
  const Dataset d = synth_dataset(DatasetKind::two_gaussians, 200, 0.3, 1);
  Vec w = Vec::Zero(3);  // [w0 w1 b]
  for (int it = 0; it < 2000; ++it) {
    Vec g = Vec::Zero(3);
    for (int i = 0; i < d.size(); ++i) {
      const double a = w[0] * d.inputs[i][0] + w[1] * d.inputs[i][1] + w[2];
      const double p = 1.0 / (1.0 + std::exp(-a));
      const double r = p - d.labels[i];
      g[0] += r * d.inputs[i][0];
      g[1] += r * d.inputs[i][1];
      g[2] += r;
    }
    w -= 0.05 / d.size() * g;
  }
  int wrong = 0;
  for (int i = 0; i < d.size(); ++i) {
    const double a = w[0] * d.inputs[i][0] + w[1] * d.inputs[i][1] + w[2];
    if ((a > 0 ? 1 : 0) != d.labels[i]) ++wrong;
  }
  CHECK(static_cast<double>(wrong) / d.size() <= 0.05);
}

TEST_CASE("dataset sharding") {
  const Dataset d = synth_dataset(DatasetKind::two_gaussians, 10, 0.1, 3);
  const auto overlap = shard_dataset(d, 4, ShardMode::full_overlap);
  REQUIRE(overlap.size() == 4);
  for (const auto& s : overlap) CHECK(s.size() == 10);
  CHECK(overlap[0] == overlap[3]);

  const auto disjoint = shard_dataset(d, 3, ShardMode::disjoint);
  std::multiset<size_t> sizes;
  std::set<int> all;
  for (const auto& s : disjoint) {
    sizes.insert(s.size());
    for (int i : s) CHECK(all.insert(i).second);  // pairwise disjoint
  }
  CHECK(all.size() == 10);
  CHECK(sizes == std::multiset<size_t>{3, 3, 4});
}

TEST_CASE("dataset CSV round trip") {
  const Dataset d = synth_dataset(DatasetKind::two_gaussians, 20, 0.3, 5);
  const std::string path = "test_dataset_roundtrip.csv";
  write_dataset_csv(d, path);
  const Dataset back = read_dataset_csv(path);
  REQUIRE(back.size() == d.size());
  for (int i = 0; i < d.size(); ++i) {
    CHECK((back.inputs[i] - d.inputs[i]).norm() == 0.0);
    CHECK(back.labels[i] == d.labels[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("mlp parameter layout") {
  MlpModel m{{2, 16, 2}, 1e-4};
  CHECK(m.param_count() == 2 * 16 + 16 + 16 * 2 + 2);
  CHECK(m.layer_param_shapes() == std::vector<int>{48, 34});
  const Vec z = m.init_params(3);
  CHECK(z.size() == m.param_count());
  CHECK(z.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(2.0));
  CHECK((z - m.init_params(3)).norm() == 0.0);
}

TEST_CASE("mlp loss at zero parameters is log(num classes)") {
  MlpModel m{{2, 4, 2}, 0.0};
  const Dataset d = synth_dataset(DatasetKind::two_gaussians, 2, 0.0, 1);
  const Vec z = Vec::Zero(m.param_count());
  auto [loss, grad] = m.loss_grad(z, d, {0});
  CHECK(loss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("duplicated sample keeps the averaged gradient") {
  MlpModel m{{2, 4, 2}, 0.0};
  const Dataset d = synth_dataset(DatasetKind::two_gaussians, 4, 0.2, 2);
  const Vec z = m.init_params(7);
  auto [l1, g1] = m.loss_grad(z, d, {1});
  auto [l2, g2] = m.loss_grad(z, d, {1, 1, 1});
  CHECK(l2 == doctest::Approx(l1));
  CHECK((g2 - g1).norm() <= 1e-14);
}

TEST_CASE("mlp gradient matches finite differences") {
  MlpModel m{{2, 5, 3}, 1e-3};
  Dataset d;
  d.num_classes = 3;
  std::mt19937_64 rng(37);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 8; ++i) {
    Vec x(2);
    x << gauss(rng), gauss(rng);
    d.inputs.push_back(x);
    d.labels.push_back(i % 3);
  }
  std::vector<int> batch(8);
  std::iota(batch.begin(), batch.end(), 0);
  const Vec z = m.init_params(11);
  auto [loss, grad] = m.loss_grad(z, d, batch);
  const auto fn = [&](const Vec& p) { return m.loss(p, d, batch); };
  const Vec fd = finite_diff_gradient(fn, z, 1e-6);
  CHECK((grad - fd).norm() <= 1e-4 * (1.0 + grad.norm()));
}

TEST_CASE("label out of range is an argument error") {
  MlpModel m{{2, 3, 2}, 0.0};
  Dataset d;
  d.inputs.push_back(Vec::Zero(2));
  d.labels.push_back(5);
  CHECK_THROWS_AS(m.loss_grad(m.init_params(1), d, {0}), std::invalid_argument);
}
