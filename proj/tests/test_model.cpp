#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "momlab/diagnostics.hpp"
#include "momlab/model.hpp"
#include "oracles.hpp"

using namespace momlab;

namespace {

// Max-norm relative error between two matrices.
double max_rel_err(const Weights& a, const Weights& b) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("forward matches hand arithmetic") {
  Weights W = Weights::Zero(3, 4);
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(2, 4);
  CHECK(forward(W, X) == 0.0);

  Weights w1(1, 2);
  w1 << 1.0, 2.0;
  Eigen::MatrixXd x1(1, 2);
  x1 << 3.0, 4.0;
  CHECK(forward(w1, x1) == doctest::Approx(1331.0).epsilon(1e-15));  // <w,x> = 11

  Eigen::MatrixXd bad(1, 3);
  CHECK_THROWS_AS(forward(w1, bad), std::invalid_argument);
}

TEST_CASE("forward is cubically homogeneous") {
  Rng rng(31);
  for (int k = 0; k < 100; ++k) {
    const int m = 1 + static_cast<int>(rng.uniform_int(3));
    const int P = 1 + static_cast<int>(rng.uniform_int(3));
    const int d = 2 + static_cast<int>(rng.uniform_int(5));
    Weights W(m, d);
    Eigen::MatrixXd X(P, d);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < d; ++c) W(r, c) = rng.normal();
    for (int r = 0; r < P; ++r)
      for (int c = 0; c < d; ++c) X(r, c) = rng.normal();
    const double scale = 0.2 + 2.0 * rng.uniform01();
    const double lhs = forward(scale * W, X);
    const double rhs = scale * scale * scale * forward(W, X);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("loss at zero weights is log 2 and decays with huge margins") {
  ExperimentConfig cfg = ExperimentConfig::defaults(6);
  cfg.N = 20;
  cfg.P = 2;
  const Dataset ds = make_train_dataset(cfg);

  const Weights W0 = Weights::Zero(cfg.m, cfg.d);
  const LossReport at_zero = loss(W0, ds, 0.0);
  CHECK(at_zero.total == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(at_zero.reg_term == 0.0);
  // S(0) = 1/2 splits the derivative mass between the classes.
  CHECK(at_zero.nu1 + at_zero.nu2 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(at_zero.nu2 == doctest::Approx(0.5 * ds.z2_fraction).epsilon(1e-12));

  // Ridge term bookkeeping.
  Weights Wr = Weights::Zero(cfg.m, cfg.d);
  Wr(0, 0) = 1.0;
  const LossReport ridged = loss(Wr, ds, 2.0);
  CHECK(ridged.reg_term == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ridged.total == doctest::Approx(ridged.data_term + 1.0).epsilon(1e-15));

  // Saturated positive margins drive the data term to zero.
  Weights Wbig = Weights::Zero(cfg.m, cfg.d);
  Wbig(0, 0) = 50.0;  // aligned with wstar: margin theta^3 * c^3 > 0, huge
  const LossReport saturated = loss(Wbig, ds, 0.0);
  CHECK(saturated.data_term < 1e-300);
}

TEST_CASE("loss rejects bad inputs") {
  ExperimentConfig cfg = ExperimentConfig::defaults(5);
  cfg.N = 4;
  const Dataset ds = make_train_dataset(cfg);
  const Weights W = Weights::Zero(cfg.m, cfg.d + 1);
  CHECK_THROWS_AS(loss(W, ds, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(loss(Weights::Zero(cfg.m, cfg.d), ds, -0.5), std::invalid_argument);
}

TEST_CASE("derivatives stay strictly positive up to margin 700") {
  for (double x : {0.0, 1.0, 36.0, 100.0, 700.0}) {
    const double lo = neg_sigmoid(x);
    const double hi = neg_sigmoid(-x);
    CHECK(lo > 0.0);
    CHECK(lo < 1.0);
    CHECK(hi > 0.0);
    CHECK(hi <= 1.0);
    CHECK(lo + hi == doctest::Approx(1.0).epsilon(1e-12));
  }
  // On the misclassified side the derivative saturates to 1 once 1 + e^x
  // rounds to 1; below that it stays strictly inside.
  CHECK(neg_sigmoid(-30.0) < 1.0);
  CHECK(std::isfinite(neg_sigmoid(-700.0)));
}

TEST_CASE("gradient vanishes at zero weights") {
  ExperimentConfig cfg = ExperimentConfig::defaults(7);
  cfg.N = 9;
  const Dataset ds = make_train_dataset(cfg);
  const Weights g = gradient(Weights::Zero(cfg.m, cfg.d), ds, 0.0);
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analytic gradient agrees with central finite differences") {
  Rng rng(417);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const testing::TinyInstance inst = testing::random_tiny_instance(rng);
    const double lambda = trial % 3 == 0 ? 0.1 : 0.0;
    const Weights analytic = gradient(inst.W, inst.ds, lambda);
    const Weights numeric = testing::fd_gradient(
        [&](const Weights& W) { return loss(W, inst.ds, lambda).total; }, inst.W, 1e-5);
    worst = std::max(worst, max_rel_err(analytic, numeric));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("with saturated margins the gradient reduces to the ridge part") {
  Rng rng(99);
  const testing::TinyInstance inst = testing::random_tiny_instance(rng);
  const double lambda = 0.75;
  // Rows strongly aligned with wstar give every sample a huge positive
  // margin (noise patches are exactly orthogonal), so the derivative
  // factors underflow to zero for all samples.
  Weights W = 0.02 * inst.W;
  for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, 0) = 60.0 + static_cast<double>(r);
  const Weights g = gradient(W, inst.ds, lambda);
  const Weights ridge = lambda * W;
  CHECK(max_rel_err(g, ridge) <= 1e-8);
}

TEST_CASE("loss is invariant under sample reordering") {
  ExperimentConfig cfg = ExperimentConfig::defaults(10);
  cfg.N = 600;
  cfg.mu = 0.2;
  const Dataset ds = make_train_dataset(cfg);
  Rng rng(8);
  Weights W(cfg.m, cfg.d);
  for (int r = 0; r < cfg.m; ++r)
    for (int c = 0; c < cfg.d; ++c) W(r, c) = 0.3 * rng.normal();

  // Reverse the samples by hand.
  Dataset reversed = ds;
  for (int i = 0; i < ds.n; ++i) {
    const int src = ds.n - 1 - i;
    reversed.patches.middleRows(static_cast<Eigen::Index>(i) * ds.P, ds.P) =
        ds.patches.middleRows(static_cast<Eigen::Index>(src) * ds.P, ds.P);
    reversed.labels[static_cast<size_t>(i)] = ds.labels[static_cast<size_t>(src)];
    reversed.margin_class[static_cast<size_t>(i)] = ds.margin_class[static_cast<size_t>(src)];
    reversed.signal_index[static_cast<size_t>(i)] = ds.signal_index[static_cast<size_t>(src)];
  }
  const LossReport a = loss(W, ds, 0.0);
  const LossReport b = loss(W, reversed, 0.0);
  CHECK(rel_err(a.total, b.total) <= 1e-12);
  CHECK(rel_err(a.nu1, b.nu1) <= 1e-12);
  CHECK(rel_err(a.nu2, b.nu2) <= 1e-12);
}

TEST_CASE("per-sample derivatives partition into the class averages") {
  ExperimentConfig cfg = ExperimentConfig::defaults(6);
  cfg.N = 50;
  cfg.mu = 0.3;
  const Dataset ds = make_train_dataset(cfg);
  Rng rng(3);
  Weights W(cfg.m, cfg.d);
  for (int r = 0; r < cfg.m; ++r)
    for (int c = 0; c < cfg.d; ++c) W(r, c) = 0.2 * rng.normal();

  const Derivatives der = per_sample_derivatives(W, ds);
  double mean = 0.0;
  for (int i = 0; i < ds.n; ++i) mean += der.ell(i);
  mean /= ds.n;
  CHECK(der.nu1 + der.nu2 == doctest::Approx(mean).epsilon(1e-14));
  for (int i = 0; i < ds.n; ++i) {
    CHECK(der.ell(i) > 0.0);
    CHECK(der.ell(i) < 1.0);
  }

  ExperimentConfig all_z1 = cfg;
  all_z1.mu = 0.0;
  const Dataset z1_only = make_train_dataset(all_z1);
  CHECK(per_sample_derivatives(W, z1_only).nu2 == 0.0);
}

TEST_CASE("weights json checkpoints round-trip") {
  Rng rng(12);
  Weights W(3, 4);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) W(r, c) = rng.normal();
  const char* path = "test_weights_tmp.json";
  save_weights_json(W, path);
  CHECK(load_weights_json(path) == W);
  std::remove(path);
}
