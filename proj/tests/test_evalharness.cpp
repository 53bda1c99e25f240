#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "momlab/evalharness.hpp"

using namespace momlab;

TEST_CASE("the zero model errs on every sample by the tie convention") {
  ExperimentConfig cfg = ExperimentConfig::defaults(6);
  cfg.n_test = 64;
  cfg.mu = 0.25;
  const Dataset test = make_test_dataset(cfg);
  const TestError err = test_error(Weights::Zero(cfg.m, cfg.d), test);
  CHECK(err.overall == 1.0);
  CHECK(err.errors == err.n);
}

TEST_CASE("a feature-aligned model is perfect when patches carry no noise") {
  ExperimentConfig cfg = ExperimentConfig::defaults(6);
  cfg.P = 1;  // single (signal) patch per sample
  cfg.n_test = 80;
  cfg.mu = 0.3;
  const Dataset test = make_test_dataset(cfg);
  Weights W = Weights::Zero(cfg.m, cfg.d);
  W.row(0) = make_wstar(cfg.d).transpose();
  const TestError err = test_error(W, test);
  CHECK(err.overall == 0.0);
}

TEST_CASE("class errors aggregate exactly into the overall error") {
  ExperimentConfig cfg = ExperimentConfig::defaults(8);
  cfg.n_test = 500;
  cfg.mu = 0.2;
  const Dataset test = make_test_dataset(cfg);
  Rng rng(21);
  Weights W(cfg.m, cfg.d);
  for (int r = 0; r < cfg.m; ++r)
    for (int k = 0; k < cfg.d; ++k) W(r, k) = 0.2 * rng.normal();
  const TestError err = test_error(W, test);
  CHECK(err.n == err.n_z1 + err.n_z2);
  CHECK(err.errors == err.errors_z1 + err.errors_z2);
  // Mixture identity on the realized test set.
  const double mu_hat = static_cast<double>(err.n_z2) / static_cast<double>(err.n);
  CHECK(err.overall ==
        doctest::Approx((1.0 - mu_hat) * err.z1 + mu_hat * err.z2).epsilon(1e-14));

  // An empty class reports as unavailable.
  ExperimentConfig no_z2 = cfg;
  no_z2.mu = 0.0;
  const Dataset z1_only = make_test_dataset(no_z2);
  const TestError e2 = test_error(W, z1_only);
  CHECK(std::isnan(e2.z2));
  CHECK(e2.overall == e2.z1);
}

TEST_CASE("run_experiment writes traces and a reproducible summary") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = ExperimentConfig::defaults(10);
  cfg.N = 300;
  cfg.n_test = 100;
  cfg.T = 25;
  cfg.mu = 0.2;
  const std::string dir_a = "test_harness_a";
  const std::string dir_b = "test_harness_b";

  const ExperimentSummary a = run_experiment(cfg, dir_a);
  const ExperimentSummary b = run_experiment(cfg, dir_b);

  CHECK(fs::exists(fs::path(dir_a) / "gd_trace.csv"));
  CHECK(fs::exists(fs::path(dir_a) / "gdm_trace.csv"));
  CHECK(fs::exists(fs::path(dir_a) / "summary.json"));

  REQUIRE(a.gd.has_value());
  REQUIRE(b.gd.has_value());
  CHECK(a.gd->final_train_loss == b.gd->final_train_loss);
  CHECK(a.gd->c_max_final == b.gd->c_max_final);
  CHECK(a.gd->test.overall == b.gd->test.overall);
  CHECK(a.gdm->final_train_loss == b.gdm->final_train_loss);
  CHECK(a.identity_check_max_errors == b.identity_check_max_errors);

  // Recursion identities verified on the recorded traces.
  CHECK(a.identity_check_max_errors.at("gd_signal_recursion") <= 1e-10);
  CHECK(a.identity_check_max_errors.at("gdm_momentum_recursion") <= 1e-10);
  CHECK(a.identity_check_max_errors.at("gdm_signal_recursion") <= 1e-10);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("T=0 reports initialization metrics only") {
  ExperimentConfig cfg = ExperimentConfig::defaults(6);
  cfg.N = 50;
  cfg.n_test = 40;
  cfg.T = 0;
  const ExperimentOutput out = run_experiment_in_memory(cfg);
  REQUIRE(out.gd.has_value());
  CHECK(out.gd->trace.rows.size() == 1);
  CHECK(out.summary.gd->final_train_loss == out.gd->trace.rows[0].loss);
  CHECK(out.summary.identity_check_max_errors.empty());
}

TEST_CASE("single-arm runs leave the other arm empty") {
  ExperimentConfig cfg = ExperimentConfig::defaults(6);
  cfg.N = 60;
  cfg.n_test = 30;
  cfg.T = 5;
  const ExperimentOutput out = run_experiment_in_memory(cfg, Arms::GDM);
  CHECK_FALSE(out.summary.gd.has_value());
  REQUIRE(out.summary.gdm.has_value());
  const auto j = nlohmann::json::parse(summary_to_json(out.summary));
  CHECK(j.at("gd").is_null());
  CHECK_FALSE(j.at("gdm").is_null());
}

TEST_CASE("a small ridge perturbs the trajectory by a bounded, growing drift") {
  ExperimentConfig cfg = ExperimentConfig::defaults(8);
  cfg.N = 200;
  cfg.n_test = 50;
  cfg.T = 50;
  const Dataset ds = make_train_dataset(cfg);

  const TrainResult clean = run_training(cfg, ds, OptimizerKind::GD);
  ExperimentConfig ridged_cfg = cfg;
  ridged_cfg.lambda = 1e-6;
  const TrainResult ridged = run_training(ridged_cfg, ds, OptimizerKind::GD);

  double prev_drift = 0.0;
  bool grew = false;
  for (size_t t = 0; t < clean.trace.rows.size(); t += 10) {
    const double drift =
        std::abs(clean.trace.rows[t].c_max - ridged.trace.rows[t].c_max);
    if (drift > prev_drift) grew = true;
    prev_drift = drift;
  }
  const double final_rel =
      std::abs(clean.trace.rows.back().c_max - ridged.trace.rows.back().c_max) /
      std::abs(clean.trace.rows.back().c_max);
  CHECK(grew);
  CHECK(final_rel < 0.05);
}
