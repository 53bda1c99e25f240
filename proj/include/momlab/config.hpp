#ifndef MOMLAB_CONFIG_HPP
#define MOMLAB_CONFIG_HPP

#include <cstdint>
#include <string>

namespace momlab {

enum class ScheduleKind { Constant, LinearDecay };

ScheduleKind parse_schedule_kind(const std::string& name);
std::string schedule_kind_name(ScheduleKind kind);

// All hyperparameters of one experiment. Defaults reproduce the synthetic
// desk-scale setup: d = 30, N = 20000 train / 2000 test samples, m = 5
// neurons, P = 5 patches, momentum 0.9, linear learning-rate decay. The
// margin strengths and noise scale are powers of the dimension
// (beta = d^-0.251, sigma = d^-0.509, alpha = c_alpha * sqrt(d) * beta);
// `defaults(d)` evaluates them, explicit values may override.
struct ExperimentConfig {
  int d = 30;          // ambient dimension
  int P = 5;           // patches per sample
  int m = 5;           // hidden neurons
  int N = 20000;       // training samples
  int n_test = 2000;   // test samples

  double c_alpha = 1.0;  // scale factor in alpha = c_alpha * sqrt(d) * beta
  double alpha = 0.0;    // large-margin signal strength
  double beta = 0.0;     // small-margin signal strength
  double sigma = 0.0;    // noise patch std
  double sigma0 = 0.0;   // weight init std
  double mu = 0.05;      // probability of a small-margin sample

  double eta_gd = 0.1;   // GD learning rate (pilot-fixed, see README)
  double eta_gdm = 1.0;  // GD+M learning rate (pilot-fixed, see README)
  double gamma = 0.9;    // momentum factor
  double lambda = 0.0;   // ridge penalty

  long T = 500;               // iterations
  std::uint64_t seed = 0;     // master seed
  ScheduleKind lr_schedule = ScheduleKind::LinearDecay;

  bool record_noise_stats = true;  // per-iteration noise summaries in traces

  // Fills alpha/beta/sigma/sigma0 from the dimension-based formulas.
  static ExperimentConfig defaults(int d = 30);

  // Throws std::invalid_argument when an invariant is violated
  // (0 < beta <= alpha, sigma > 0, sigma0 > 0, 0 <= mu <= 1, counts >= 1,
  // positive learning rates, 0 <= gamma < 1, lambda >= 0, T >= 0).
  void validate() const;
};

// Flat JSON config file support. Missing keys fall back to defaults(d);
// precedence for the signal strengths is alpha > c_alpha/beta-derived.
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace momlab

#endif  // MOMLAB_CONFIG_HPP
