#include "momlab/evalharness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#ifndef MOMLAB_BUILD_TAG
#define MOMLAB_BUILD_TAG "untagged"
#endif

namespace momlab {

std::string build_tag() { return MOMLAB_BUILD_TAG; }

TestError test_error(const Weights& W, const Dataset& ds) {
  if (ds.n < 1) throw std::invalid_argument("test_error: empty test set");
  TestError out;
  out.n = ds.n;
  const Eigen::MatrixXd U = W * ds.patches.transpose();
  for (int i = 0; i < ds.n; ++i) {
    const Eigen::Index base = static_cast<Eigen::Index>(i) * ds.P;
    double f = 0.0;
    for (Eigen::Index r = 0; r < U.rows(); ++r)
      for (int j = 0; j < ds.P; ++j) {
        const double u = U(r, base + j);
        f += u * u * u;
      }
    const double margin = static_cast<double>(ds.labels[static_cast<size_t>(i)]) * f;
    const bool err = margin <= 0.0;
    const bool z2 = ds.is_z2(i);
    out.errors += err;
    if (z2) {
      ++out.n_z2;
      out.errors_z2 += err;
    } else {
      ++out.n_z1;
      out.errors_z1 += err;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.overall = static_cast<double>(out.errors) / static_cast<double>(out.n);
  out.z1 = out.n_z1 ? static_cast<double>(out.errors_z1) / static_cast<double>(out.n_z1) : nan;
  out.z2 = out.n_z2 ? static_cast<double>(out.errors_z2) / static_cast<double>(out.n_z2) : nan;
  return out;
}

namespace {

ArmSummary summarize_arm(const TrainResult& result, const Dataset& test_set) {
  ArmSummary arm;
  arm.diverged = result.diverged;
  const TraceRow& last = result.trace.rows.back();
  arm.final_train_loss = last.loss;
  arm.c_max_final = last.c_max;
  arm.xi_total_max_final = last.xi_total_max;
  arm.xi_total_z2_max_final = last.xi_total_z2_max;
  arm.test = test_error(result.W, test_set);
  const long t_start = last.t / 2;
  arm.rate_constant = empirical_rate_check(result.trace, t_start);
  return arm;
}

nlohmann::json test_error_to_json(const TestError& e) {
  auto opt = [](double v) {
    return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
  };
  return nlohmann::json{{"overall", e.overall}, {"z1", opt(e.z1)},     {"z2", opt(e.z2)},
                        {"n", e.n},             {"n_z1", e.n_z1},      {"n_z2", e.n_z2},
                        {"errors", e.errors},   {"errors_z1", e.errors_z1},
                        {"errors_z2", e.errors_z2}};
}

nlohmann::json arm_to_json(const ArmSummary& arm) {
  auto num = [](double v) {
    return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
  };
  return nlohmann::json{{"final_train_loss", arm.final_train_loss},
                        {"test_error", test_error_to_json(arm.test)},
                        {"c_max_final", arm.c_max_final},
                        {"xi_total_max_final", num(arm.xi_total_max_final)},
                        {"xi_total_z2_max_final", num(arm.xi_total_z2_max_final)},
                        {"rate_constant", arm.rate_constant},
                        {"diverged", arm.diverged}};
}

}  // namespace

ExperimentOutput run_experiment_in_memory(const ExperimentConfig& cfg, Arms arms) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  ExperimentOutput out;
  out.summary.cfg = cfg;
  out.summary.build_tag = build_tag();

  const Dataset train = make_train_dataset(cfg);
  const Dataset test = make_test_dataset(cfg);

  TrainOptions options;
  options.record_noise_stats = cfg.record_noise_stats;

  if (arms == Arms::GD || arms == Arms::Both) {
    out.gd = run_training(cfg, train, OptimizerKind::GD, options);
    out.summary.gd = summarize_arm(*out.gd, test);
  }
  if (arms == Arms::GDM || arms == Arms::Both) {
    out.gdm = run_training(cfg, train, OptimizerKind::GDM, options);
    out.summary.gdm = summarize_arm(*out.gdm, test);
  }

  // The exact recursions only hold without the ridge term.
  if (cfg.lambda == 0.0 && cfg.T > 0) {
    auto& errs = out.summary.identity_check_max_errors;
    if (out.gd && !out.gd->diverged)
      errs["gd_signal_recursion"] = check_gd_signal_recursion(out.gd->trace, train);
    if (out.gdm && !out.gdm->diverged) {
      const GdmRecursionErrors gdm_errs = check_gdm_signal_recursion(out.gdm->trace, train);
      errs["gdm_momentum_recursion"] = gdm_errs.momentum;
      errs["gdm_signal_recursion"] = gdm_errs.signal;
    }
    const Weights& W_final = out.gd ? out.gd->W : out.gdm->W;
    errs["signal_gradient_identity_final"] =
        check_signal_gradient_identity(W_final, train, cfg.lambda);
    if (cfg.P >= 2) {
      const int j = train.signal_index[0] == 0 ? 1 : 0;
      errs["noise_gradient_identity_final"] =
          check_noise_gradient_identity(W_final, train, 0, j, 0, cfg.lambda);
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  out.summary.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
  return out;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                 Arms arms) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  ExperimentOutput out = run_experiment_in_memory(cfg, arms);
  if (out.gd) write_trace_csv(out.gd->trace, (fs::path(out_dir) / "gd_trace.csv").string());
  if (out.gdm)
    write_trace_csv(out.gdm->trace, (fs::path(out_dir) / "gdm_trace.csv").string());

  std::ofstream summary_file(fs::path(out_dir) / "summary.json");
  if (!summary_file) throw std::runtime_error("cannot write summary.json in " + out_dir);
  summary_file << summary_to_json(out.summary) << "\n";
  return out.summary;
}

std::string summary_to_json(const ExperimentSummary& summary) {
  nlohmann::json j;
  j["gd"] = summary.gd ? arm_to_json(*summary.gd) : nlohmann::json(nullptr);
  j["gdm"] = summary.gdm ? arm_to_json(*summary.gdm) : nlohmann::json(nullptr);
  j["identity_check_max_errors"] = summary.identity_check_max_errors;
  j["runtime_seconds"] = summary.runtime_seconds;
  j["config"] = nlohmann::json::parse(config_to_json(summary.cfg));
  j["build_tag"] = summary.build_tag;
  return j.dump(2);
}

}  // namespace momlab
