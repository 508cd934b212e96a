#include "doctest.h"
#include "test_support.hpp"

#include "maxent/batch.hpp"
#include "maxent/errors.hpp"
#include "maxent/pbn.hpp"

#include <atomic>
#include <stdexcept>

using namespace maxent;

TEST_CASE("for_each_index visits every index once under both policies") {
  for (auto exec : {Execution::serial, Execution::parallel}) {
    std::vector<int> hits(1000, 0);
    for_each_index(hits.size(), exec, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
  CHECK(parallel_threads() >= 1);
}

TEST_CASE("parallel loop rethrows the lowest failing index") {
  std::atomic<int> calls{0};
  try {
    for_each_index(100, Execution::parallel, [&](std::size_t i) {
      ++calls;
      if (i == 17 || i == 63) throw std::runtime_error("index " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "index 17");
  }
  CHECK(calls.load() == 100);
}

TEST_CASE("batch gamma inverse is identical serial and parallel") {
  RngStream rng(1);
  for (auto kind : {ActivationKind::ted, ActivationKind::tg, ActivationKind::exp, ActivationKind::linear}) {
    CAPTURE(to_string(kind));
    const Matrix w = testing::gaussian_matrix(16, 4, rng, 0.25);
    const LayerMap map(w, kind);
    Matrix x(64, 16);
    for (Eigen::Index r = 0; r < 64; ++r) {
      for (Eigen::Index i = 0; i < 16; ++i) x(r, i) = sample_univariate({kind, kind_info(kind).theta0}, rng);
    }
    const Matrix z = x * w;
    const auto serial = batch_gamma_inverse(map, z, {}, Execution::serial);
    const auto parallel = batch_gamma_inverse(map, z, {}, Execution::parallel);
    REQUIRE(serial.size() == 64);
    for (std::size_t r = 0; r < 64; ++r) {
      CHECK(serial[r].converged);
      CHECK(serial[r].h == parallel[r].h);
      CHECK(serial[r].x_hat == parallel[r].x_hat);
      CHECK(serial[r].iterations == parallel[r].iterations);
      const auto single = gamma_inverse(map, z.row(static_cast<Eigen::Index>(r)).transpose());
      CHECK(single.h == serial[r].h);
    }
  }
}

TEST_CASE("batch mean function") {
  RngStream rng(2);
  const Matrix theta = testing::gaussian_matrix(50, 7, rng, 5.0);
  const Matrix a = batch_mean_lambda(ActivationKind::tg, theta, Execution::serial);
  const Matrix b = batch_mean_lambda(ActivationKind::tg, theta, Execution::parallel);
  CHECK(a == b);
  CHECK(a(3, 4) == mean_lambda(ActivationKind::tg, theta(3, 4)));
  CHECK_THROWS_AS(batch_mean_lambda(ActivationKind::exp, theta.cwiseAbs(), Execution::parallel),
                  DomainViolation);
}

TEST_CASE("parallel chains match serial chains and use distinct streams") {
  RngStream rng(3);
  const Matrix w = testing::gaussian_matrix(6, 2, rng, 0.5);
  const LayerMap map(w, ActivationKind::tg);
  const Vector z = w.transpose() * Vector::Constant(6, 0.8);
  const Vector x0 = default_start(map, z);
  const ChainSchedule sched{50, 100, 1};
  const auto serial = run_chains(map, z, x0, sched, 42, 4, Execution::serial);
  const auto parallel = run_chains(map, z, x0, sched, 42, 4, Execution::parallel);
  REQUIRE(serial.size() == 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(serial[c] == parallel[c]);
  CHECK(serial[0] != serial[1]);
  RngStream c2(42, 2);
  CHECK(run_chain(map, z, x0, sched, c2) == serial[2]);
  const Matrix stacked = stack_rows(serial);
  CHECK(stacked.rows() == 400);
  CHECK(stacked.row(100) == serial[1].row(0));
  CHECK_THROWS_AS(run_chains(map, z, x0, sched, 42, 0, Execution::serial), InvalidInput);
  CHECK_THROWS_AS(run_chains(map, z, Vector::Constant(6, -1.0), sched, 42, 3, Execution::parallel),
                  InfeasibleStart);
}

TEST_CASE("network gradients and losses are identical serial and parallel") {
  RngStream rng(4);
  PbnNetwork net = random_network({8, 4, 2}, {ActivationKind::tg, ActivationKind::tg}, rng);
  Matrix data(40, 8);
  for (Eigen::Index r = 0; r < 40; ++r) {
    for (Eigen::Index i = 0; i < 8; ++i) data(r, i) = sample_univariate({ActivationKind::tg, 0.0}, rng);
  }
  const NetworkGradient a = loss_gradient(net, data, {}, Execution::serial);
  const NetworkGradient b = loss_gradient(net, data, {}, Execution::parallel);
  CHECK(a.loss == b.loss);
  CHECK(a.used == b.used);
  CHECK(a.failed == b.failed);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a.weights[k] == b.weights[k]);
    CHECK(a.biases[k] == b.biases[k]);
  }
  CHECK(reconstruction_loss(net, data, {}, Execution::serial) ==
        reconstruction_loss(net, data, {}, Execution::parallel));

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 10;
  PbnNetwork n1 = net, n2 = net;
  RngStream r1(9), r2(9);
  cfg.exec = Execution::serial;
  const auto t1 = train_autoencoder(n1, data, cfg, r1);
  cfg.exec = Execution::parallel;
  const auto t2 = train_autoencoder(n2, data, cfg, r2);
  for (std::size_t e = 0; e < t1.size(); ++e) CHECK(t1[e].loss == t2[e].loss);
  CHECK(n1.layer(0).map.w() == n2.layer(0).map.w());
}
