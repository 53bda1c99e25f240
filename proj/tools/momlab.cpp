#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "momlab/data.hpp"
#include "momlab/diagnostics.hpp"
#include "momlab/evalharness.hpp"
#include "momlab/tpm.hpp"

namespace {

using momlab::ExperimentConfig;

void print_error(const std::string& kind, const std::string& message) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

struct ConfigFlags {
  std::string config_path;
  // CLI overrides; negative sentinel means "not set" for non-negative fields.
  double mu = -1.0, eta_gd = -1.0, eta_gdm = -1.0, gamma = -1.0, lambda = -1.0;
  double alpha = -1.0, beta = -1.0, sigma = -1.0, sigma0 = -1.0, c_alpha = -1.0;
  long T = -1;
  int d = -1, P = -1, m = -1, N = -1, n_test = -1;
  long long seed = -1;
  std::string schedule;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--d", flags.d, "ambient dimension");
  cmd->add_option("--P", flags.P, "patches per sample");
  cmd->add_option("--m", flags.m, "hidden neurons");
  cmd->add_option("--N", flags.N, "training samples");
  cmd->add_option("--n-test", flags.n_test, "test samples");
  cmd->add_option("--mu", flags.mu, "small-margin probability");
  cmd->add_option("--alpha", flags.alpha, "large-margin strength");
  cmd->add_option("--beta", flags.beta, "small-margin strength");
  cmd->add_option("--sigma", flags.sigma, "noise std");
  cmd->add_option("--sigma0", flags.sigma0, "init std");
  cmd->add_option("--c-alpha", flags.c_alpha, "alpha scale factor");
  cmd->add_option("--eta-gd", flags.eta_gd, "GD learning rate");
  cmd->add_option("--eta-gdm", flags.eta_gdm, "GD+M learning rate");
  cmd->add_option("--gamma", flags.gamma, "momentum factor");
  cmd->add_option("--lambda", flags.lambda, "ridge penalty");
  cmd->add_option("--T", flags.T, "iterations");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--schedule", flags.schedule, "constant | linear-decay");
}

ExperimentConfig resolve_config(const ConfigFlags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = momlab::load_config(flags.config_path);
  } else {
    cfg = ExperimentConfig::defaults(flags.d > 0 ? flags.d : 30);
  }
  if (flags.d > 0 && flags.config_path.empty()) {
    // Already folded into defaults(d).
  } else if (flags.d > 0) {
    // Re-derive dimension-based values for an explicit --d over a file.
    ExperimentConfig derived = ExperimentConfig::defaults(flags.d);
    cfg.d = derived.d;
    cfg.alpha = derived.alpha;
    cfg.beta = derived.beta;
    cfg.sigma = derived.sigma;
    cfg.sigma0 = derived.sigma0;
  }
  if (flags.P > 0) cfg.P = flags.P;
  if (flags.m > 0) cfg.m = flags.m;
  if (flags.N > 0) cfg.N = flags.N;
  if (flags.n_test > 0) cfg.n_test = flags.n_test;
  if (flags.mu >= 0.0) cfg.mu = flags.mu;
  if (flags.c_alpha >= 0.0) {
    cfg.c_alpha = flags.c_alpha;
    cfg.alpha = cfg.c_alpha * std::sqrt(static_cast<double>(cfg.d)) * cfg.beta;
  }
  if (flags.beta >= 0.0) {
    cfg.beta = flags.beta;
    cfg.alpha = cfg.c_alpha * std::sqrt(static_cast<double>(cfg.d)) * cfg.beta;
  }
  if (flags.alpha >= 0.0) cfg.alpha = flags.alpha;
  if (flags.sigma >= 0.0) cfg.sigma = flags.sigma;
  if (flags.sigma0 >= 0.0) cfg.sigma0 = flags.sigma0;
  if (flags.eta_gd >= 0.0) cfg.eta_gd = flags.eta_gd;
  if (flags.eta_gdm >= 0.0) cfg.eta_gdm = flags.eta_gdm;
  if (flags.gamma >= 0.0) cfg.gamma = flags.gamma;
  if (flags.lambda >= 0.0) cfg.lambda = flags.lambda;
  if (flags.T >= 0) cfg.T = flags.T;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (!flags.schedule.empty()) cfg.lr_schedule = momlab::parse_schedule_kind(flags.schedule);
  cfg.validate();
  return cfg;
}

int cmd_run(const ConfigFlags& flags, const std::string& out_dir,
            const std::string& optimizer) {
  const ExperimentConfig cfg = resolve_config(flags);
  momlab::Arms arms = momlab::Arms::Both;
  if (optimizer == "gd") arms = momlab::Arms::GD;
  else if (optimizer == "gdm") arms = momlab::Arms::GDM;
  else if (optimizer != "both")
    throw CLI::ValidationError("--optimizer must be gd, gdm or both");

  const momlab::ExperimentSummary summary = momlab::run_experiment(cfg, out_dir, arms);
  std::cout << momlab::summary_to_json(summary) << "\n";
  const bool diverged = (summary.gd && summary.gd->diverged) ||
                        (summary.gdm && summary.gdm->diverged);
  if (diverged) {
    print_error("diverged", "training diverged; partial outputs were written");
    return 3;
  }
  return 0;
}

int cmd_check_identities(std::uint64_t seed) {
  const double tol = 1e-10;
  momlab::Rng rng(seed);
  double worst_signal = 0.0, worst_noise = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ExperimentConfig cfg = ExperimentConfig::defaults(2 + static_cast<int>(rng.uniform_int(7)));
    cfg.P = 2 + static_cast<int>(rng.uniform_int(2));
    cfg.m = 1 + static_cast<int>(rng.uniform_int(3));
    cfg.N = 2 + static_cast<int>(rng.uniform_int(9));
    cfg.mu = 0.3;
    cfg.seed = rng.next_u64();
    const momlab::Dataset ds = momlab::make_train_dataset(cfg);
    momlab::Weights W(cfg.m, cfg.d);
    for (int r = 0; r < cfg.m; ++r)
      for (int k = 0; k < cfg.d; ++k) W(r, k) = 0.5 * rng.normal();

    worst_signal = std::max(worst_signal, momlab::check_signal_gradient_identity(W, ds));
    int i = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.N)));
    int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.P)));
    if (j == ds.signal_index[static_cast<size_t>(i)]) j = (j + 1) % cfg.P;
    const int r = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.m)));
    worst_noise = std::max(worst_noise, momlab::check_noise_gradient_identity(W, ds, i, j, r));
  }

  // Recursion suite on a reduced run, both optimizers.
  ExperimentConfig cfg = ExperimentConfig::defaults(30);
  cfg.N = 500;
  cfg.n_test = 50;
  cfg.T = 50;
  cfg.lambda = 0.0;
  cfg.seed = seed;
  const momlab::Dataset ds = momlab::make_train_dataset(cfg);
  const momlab::TrainResult gd = momlab::run_training(cfg, ds, momlab::OptimizerKind::GD);
  const momlab::TrainResult gdm = momlab::run_training(cfg, ds, momlab::OptimizerKind::GDM);
  const double gd_rec = momlab::check_gd_signal_recursion(gd.trace, ds);
  const momlab::GdmRecursionErrors gdm_rec = momlab::check_gdm_signal_recursion(gdm.trace, ds);
  const double sandwich = momlab::sigmoid_loss_sandwich_violation();
  const momlab::IdentityTolerance tols = momlab::IdentityTolerance::for_horizon(cfg.T);

  nlohmann::json j{{"signal_gradient_identity", worst_signal},
                   {"noise_gradient_identity", worst_noise},
                   {"gd_signal_recursion", gd_rec},
                   {"gdm_momentum_recursion", gdm_rec.momentum},
                   {"gdm_signal_recursion", gdm_rec.signal},
                   {"sigmoid_sandwich_violation", sandwich},
                   {"rel_tol", tol},
                   {"kappa", tols.kappa},
                   {"gd_saturated_steps", momlab::count_saturated_steps(gd.trace, tols.kappa)},
                   {"gdm_saturated_steps", momlab::count_saturated_steps(gdm.trace, tols.kappa)}};
  std::cout << j.dump(2) << "\n";
  const bool ok = worst_signal <= tol && worst_noise <= tol && gd_rec <= tol &&
                  gdm_rec.momentum <= tol && gdm_rec.signal <= tol && sandwich <= 1.0;
  if (!ok) print_error("identity_check_failed", "at least one identity exceeded tolerance");
  return ok ? 0 : 1;
}

int cmd_check_tpm(const std::string& spec_path, const std::string& out_path,
                  std::uint64_t seed) {
  if (!spec_path.empty()) {
    const int failures = momlab::tpm::run_batch_file(spec_path, out_path);
    std::cout << "tpm batch: " << (failures == 0 ? "all bounds hold" : "bound violations")
              << ", report written to " << out_path << "\n";
    return failures == 0 ? 0 : 1;
  }
  const std::string report = momlab::tpm::builtin_battery_report(seed, 100);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << report << "\n";
  const auto parsed = nlohmann::json::parse(report);
  int failures = 0;
  for (const auto& entry : parsed)
    if (!entry.at("pass").get<bool>()) ++failures;
  std::cout << "tpm battery: " << parsed.size() << " specs, " << failures
            << " failures, report written to " << out_path << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic patch-data laboratory for full-batch GD and heavy-ball GD+M"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  std::string out_dir = "out";
  std::string optimizer = "both";
  CLI::App* run = app.add_subcommand("run", "train and evaluate on the synthetic task");
  add_config_flags(run, run_flags);
  run->add_option("--out-dir", out_dir, "output directory");
  run->add_option("--optimizer", optimizer, "gd | gdm | both");

  std::string suite = "all";
  std::string tpm_specs;
  std::string tpm_report = "tpm_report.json";
  long long check_seed = 12345;
  CLI::App* check = app.add_subcommand("check", "identity and bound suites");
  check->add_option("--suite", suite, "identities | tpm | all");
  check->add_option("--tpm-specs", tpm_specs, "JSON list of sequence specs");
  check->add_option("--out", tpm_report, "TPM report path");
  check->add_option("--seed", check_seed, "battery seed");

  ConfigFlags gen_flags;
  std::string gen_out = "dataset.csv";
  CLI::App* gen = app.add_subcommand("gen-data", "export a training dataset as CSV");
  add_config_flags(gen, gen_flags);
  gen->add_option("--out", gen_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags, out_dir, optimizer);
    if (check->parsed()) {
      int rc = 0;
      if (suite == "identities" || suite == "all")
        rc = std::max(rc, cmd_check_identities(static_cast<std::uint64_t>(check_seed)));
      if (suite == "tpm" || suite == "all")
        rc = std::max(rc, cmd_check_tpm(tpm_specs, tpm_report,
                                        static_cast<std::uint64_t>(check_seed)));
      if (suite != "identities" && suite != "tpm" && suite != "all") {
        print_error("usage", "--suite must be identities, tpm or all");
        return 2;
      }
      return rc;
    }
    if (gen->parsed()) {
      const ExperimentConfig cfg = resolve_config(gen_flags);
      momlab::export_dataset_csv(momlab::make_train_dataset(cfg), gen_out);
      std::cout << "wrote " << cfg.N << " samples to " << gen_out << "\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    print_error("usage", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    print_error("invalid_config", e.what());
    return 2;
  } catch (const momlab::DivergedError& e) {
    print_error("diverged", e.what());
    return 3;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
