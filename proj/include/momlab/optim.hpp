#ifndef MOMLAB_OPTIM_HPP
#define MOMLAB_OPTIM_HPP

#include <functional>
#include <stdexcept>
#include <vector>

#include "momlab/model.hpp"

namespace momlab {

// Thrown when a step produces non-finite values or the divergence guard
// trips (|loss| or any weight beyond 1e12).
struct DivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double eta0 = 0.0;
  long T = 0;

  // Step size used for the update from iterate t to t+1. Linear decay:
  // eta_t = eta0 * (1 - t/T), positive for every t < T.
  double at(long t) const {
    if (kind == ScheduleKind::Constant) return eta0;
    return eta0 * (1.0 - static_cast<double>(t) / static_cast<double>(T));
  }
};

// Heavy-ball buffer g, updated as g <- gamma g + (1-gamma) grad before the
// weights move. Starts at zero.
struct MomentumState {
  Eigen::MatrixXd buffer;
  static MomentumState zeros(Eigen::Index m, Eigen::Index d) {
    MomentumState s;
    s.buffer = Eigen::MatrixXd::Zero(m, d);
    return s;
  }
};

enum class OptimizerKind { GD, GDM };

Weights gd_step(const Weights& W, const Dataset& ds, double eta_t, double lambda);

std::pair<Weights, MomentumState> gdm_step(const Weights& W, const MomentumState& state,
                                           const Dataset& ds, double eta_t, double gamma,
                                           double lambda);

// One recorded iteration. Row t describes the state after t steps: loss
// and derivatives at W^(t), the signal projections c_r = <w_r, w*>, the
// measured gradient projection on w*, the momentum projection (GD+M), and
// noise summaries when enabled. eta_t is the step size applied to move to
// t+1 (zero on the final row).
struct TraceRow {
  long t = 0;
  double eta_t = 0.0;
  double loss = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  Eigen::VectorXd c;         // m signal components
  double c_max = 0.0;
  int r_max = 0;             // argmax_r c_r, lowest index on ties
  double xi_max = 0.0;       // max squared noise projection
  double xi_total_max = 0.0;
  double xi_total_z2_max = 0.0;
  Eigen::VectorXd sig_grad;  // <grad_r, w*> per neuron
  Eigen::VectorXd mom_sig;   // <g_r, w*> per neuron (empty for GD)
};

struct Trace {
  OptimizerKind optimizer = OptimizerKind::GD;
  double gamma = 0.0;
  std::vector<TraceRow> rows;
};

// Read-only view handed to per-iteration hooks.
struct HookContext {
  long t;
  double eta_t;
  const Weights& W;
  const MomentumState* momentum;  // null for GD
  const LossReport& report;
};
using TrainingHook = std::function<void(const HookContext&)>;

struct TrainOptions {
  bool record_noise_stats = true;
  TrainingHook hook;  // optional
};

struct TrainResult {
  Weights W;
  Trace trace;
  bool diverged = false;
  long diverged_at = -1;
};

// Runs T full-batch iterations from the Gaussian init drawn on the
// (seed, init) substream, so GD and GD+M arms of one experiment start from
// identical weights. Deterministic given (cfg, dataset).
TrainResult run_training(const ExperimentConfig& cfg, const Dataset& ds,
                         OptimizerKind kind, const TrainOptions& options = {});

Weights init_weights(const ExperimentConfig& cfg);

void write_trace_csv(const Trace& trace, const std::string& path);

}  // namespace momlab

#endif  // MOMLAB_OPTIM_HPP
