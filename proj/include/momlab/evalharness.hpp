#ifndef MOMLAB_EVALHARNESS_HPP
#define MOMLAB_EVALHARNESS_HPP

#include <map>
#include <optional>
#include <string>

#include "momlab/diagnostics.hpp"
#include "momlab/optim.hpp"

namespace momlab {

// 0-1 test error, overall and per margin class. A sample counts as an
// error when y * f(X) <= 0: the tie goes against the model, so the zero
// model scores error one rather than accuracy one. Class errors are NaN
// when the class is empty on the realized test set.
struct TestError {
  double overall = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  long n = 0, n_z1 = 0, n_z2 = 0;
  long errors = 0, errors_z1 = 0, errors_z2 = 0;
};
TestError test_error(const Weights& W, const Dataset& ds);

struct ArmSummary {
  double final_train_loss = 0.0;
  TestError test;
  double c_max_final = 0.0;
  double xi_total_max_final = 0.0;
  double xi_total_z2_max_final = 0.0;
  double rate_constant = 0.0;  // max_{t >= T/2} (t - T/2 + 1) * loss(t)
  bool diverged = false;
};

struct ExperimentSummary {
  std::optional<ArmSummary> gd;
  std::optional<ArmSummary> gdm;
  // Max relative errors of the exact identities, filled when lambda = 0.
  std::map<std::string, double> identity_check_max_errors;
  double runtime_seconds = 0.0;
  ExperimentConfig cfg;
  std::string build_tag;
};

enum class Arms { GD, GDM, Both };

// Trains the requested arms from a shared initialization on a shared
// training set, evaluates on a fresh test set, writes per-arm trace CSVs
// plus summary.json under out_dir, and (for lambda = 0) verifies the
// signal/momentum recursions on the recorded traces. Deterministic given
// the config.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                 Arms arms = Arms::Both);

// In-memory variant used by tests; does not touch the filesystem.
struct ExperimentOutput {
  ExperimentSummary summary;
  std::optional<TrainResult> gd;
  std::optional<TrainResult> gdm;
};
ExperimentOutput run_experiment_in_memory(const ExperimentConfig& cfg,
                                          Arms arms = Arms::Both);

std::string summary_to_json(const ExperimentSummary& summary);

std::string build_tag();

}  // namespace momlab

#endif  // MOMLAB_EVALHARNESS_HPP
