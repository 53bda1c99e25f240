#include "momlab/optim.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace momlab {

namespace {

constexpr double kDivergenceGuard = 1e12;

void check_finite_gradient(const Weights& grad) {
  if (!grad.allFinite()) throw DivergedError("non-finite gradient");
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int r = 1; r < v.size(); ++r)
    if (v(r) > v(best)) best = r;
  return best;
}

TraceRow make_row(long t, double eta_t, const Weights& W, const LossReport& report,
                  const Weights& grad, const MomentumState* momentum,
                  const NoiseStats* noise) {
  TraceRow row;
  row.t = t;
  row.eta_t = eta_t;
  row.loss = report.total;
  row.nu1 = report.nu1;
  row.nu2 = report.nu2;
  // w* is the first basis vector, so projections are first columns.
  row.c = W.col(0);
  row.r_max = argmax_lowest(row.c);
  row.c_max = row.c(row.r_max);
  row.sig_grad = grad.col(0);
  if (momentum) row.mom_sig = momentum->buffer.col(0);
  if (noise) {
    row.xi_max = noise->xi_sq_max;
    row.xi_total_max = noise->xi_total_max;
    row.xi_total_z2_max = noise->xi_total_z2_max;
  }
  return row;
}

}  // namespace

Weights gd_step(const Weights& W, const Dataset& ds, double eta_t, double lambda) {
  if (eta_t < 0.0) throw std::invalid_argument("gd_step: eta_t must be >= 0");
  const Weights grad = gradient(W, ds, lambda);
  check_finite_gradient(grad);
  return W - eta_t * grad;
}

std::pair<Weights, MomentumState> gdm_step(const Weights& W, const MomentumState& state,
                                           const Dataset& ds, double eta_t, double gamma,
                                           double lambda) {
  if (eta_t < 0.0) throw std::invalid_argument("gdm_step: eta_t must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("gdm_step: gamma must lie in [0, 1)");
  if (state.buffer.rows() != W.rows() || state.buffer.cols() != W.cols())
    throw std::invalid_argument("gdm_step: momentum buffer shape mismatch");
  const Weights grad = gradient(W, ds, lambda);
  check_finite_gradient(grad);
  MomentumState next;
  next.buffer = gamma * state.buffer + (1.0 - gamma) * grad;
  Weights W_next = W - eta_t * next.buffer;
  return {std::move(W_next), std::move(next)};
}

Weights init_weights(const ExperimentConfig& cfg) {
  Rng rng = Rng::stream(cfg.seed, kStreamInit, 0);
  Weights W(cfg.m, cfg.d);
  for (int r = 0; r < cfg.m; ++r)
    for (int k = 0; k < cfg.d; ++k) W(r, k) = cfg.sigma0 * rng.normal();
  return W;
}

TrainResult run_training(const ExperimentConfig& cfg, const Dataset& ds,
                         OptimizerKind kind, const TrainOptions& options) {
  cfg.validate();
  const Schedule schedule{cfg.lr_schedule,
                          kind == OptimizerKind::GD ? cfg.eta_gd : cfg.eta_gdm, cfg.T};

  TrainResult result;
  result.trace.optimizer = kind;
  result.trace.gamma = kind == OptimizerKind::GDM ? cfg.gamma : 0.0;
  result.trace.rows.reserve(static_cast<size_t>(cfg.T) + 1);

  Weights W = init_weights(cfg);
  MomentumState momentum = MomentumState::zeros(cfg.m, cfg.d);
  const bool use_momentum = kind == OptimizerKind::GDM;

  LossReport report;
  Weights grad;
  NoiseStats noise;
  NoiseStats* noise_ptr = options.record_noise_stats ? &noise : nullptr;

  for (long t = 0; t <= cfg.T; ++t) {
    loss_and_gradient(W, ds, cfg.lambda, report, grad, noise_ptr);

    const bool finite = std::isfinite(report.total) && grad.allFinite() &&
                        std::abs(report.total) < kDivergenceGuard &&
                        W.cwiseAbs().maxCoeff() < kDivergenceGuard;
    const double eta_t = t < cfg.T ? schedule.at(t) : 0.0;

    result.trace.rows.push_back(make_row(t, eta_t, W, report, grad,
                                         use_momentum ? &momentum : nullptr, noise_ptr));
    if (!finite) {
      result.diverged = true;
      result.diverged_at = t;
      break;
    }
    if (options.hook) {
      HookContext ctx{t, eta_t, W, use_momentum ? &momentum : nullptr, report};
      options.hook(ctx);
    }
    if (t == cfg.T) break;

    if (use_momentum) {
      momentum.buffer = cfg.gamma * momentum.buffer + (1.0 - cfg.gamma) * grad;
      W -= eta_t * momentum.buffer;
    } else {
      W -= eta_t * grad;
    }
  }

  result.W = std::move(W);
  return result;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f,
               "t,eta_t,loss,nu1,nu2,c_max,r_max,xi_max,xi_total_z2_max,"
               "sig_grad_max,mom_sig_max\n");
  for (const TraceRow& row : trace.rows) {
    const double sig_grad_max = row.sig_grad.size() ? row.sig_grad.cwiseAbs().maxCoeff() : 0.0;
    std::fprintf(f, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,", row.t,
                 row.eta_t, row.loss, row.nu1, row.nu2, row.c_max, row.r_max, row.xi_max,
                 row.xi_total_z2_max, sig_grad_max);
    if (row.mom_sig.size())
      std::fprintf(f, "%.17g\n", row.mom_sig.cwiseAbs().maxCoeff());
    else
      std::fputc('\n', f);
  }
  std::fclose(f);
}

}  // namespace momlab
