#include "momlab/diagnostics.hpp"

#include <stdexcept>

namespace momlab {

Eigen::VectorXd project_signal(const Weights& W, const Eigen::VectorXd& wstar) {
  if (W.cols() != wstar.size())
    throw std::invalid_argument("project_signal: dimension mismatch");
  return W * wstar;
}

NoiseProjection project_noise(const Weights& W, const Dataset& ds) {
  NoiseProjection out;
  out.xi = W * ds.patches.transpose();
  out.xi_total.setZero(ds.n);
  for (int i = 0; i < ds.n; ++i) {
    const double y = static_cast<double>(ds.labels[static_cast<size_t>(i)]);
    const int sig = ds.signal_index[static_cast<size_t>(i)];
    double total = 0.0;
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (int j = 0; j < ds.P; ++j)
        if (j != sig) {
          const double v = out.xi(r, ds.row_of(i, j));
          total += y * v * v * v;
        }
    out.xi_total(i) = total;
  }
  return out;
}

double check_signal_gradient_identity(const Weights& W, const Dataset& ds,
                                      double lambda) {
  const Weights grad = gradient(W, ds, lambda);
  const Eigen::VectorXd measured_raw = grad * ds.wstar;
  const Eigen::VectorXd c = project_signal(W, ds.wstar);

  // Independent side: class sums of the derivatives, accumulated straight
  // from the per-sample values.
  const LossReport report = loss(W, ds, 0.0);
  double sum_z1 = 0.0, sum_z2 = 0.0;
  for (int i = 0; i < ds.n; ++i) {
    if (ds.is_z2(i))
      sum_z2 += report.per_sample_derivative(i);
    else
      sum_z1 += report.per_sample_derivative(i);
  }
  const double a3 = ds.alpha * ds.alpha * ds.alpha;
  const double b3 = ds.beta * ds.beta * ds.beta;
  const double coef = 3.0 / static_cast<double>(ds.n) * (a3 * sum_z1 + b3 * sum_z2);

  double worst = 0.0;
  for (Eigen::Index r = 0; r < W.rows(); ++r) {
    const double measured = measured_raw(r) - lambda * c(r);
    const double closed = -coef * c(r) * c(r);
    worst = std::max(worst, rel_err(measured, closed));
  }
  return worst;
}

double check_noise_gradient_identity(const Weights& W, const Dataset& ds, int i, int j,
                                     int r, double lambda) {
  if (i < 0 || i >= ds.n || r < 0 || r >= W.rows() || j < 0 || j >= ds.P)
    throw std::invalid_argument("check_noise_gradient_identity: index out of range");
  if (j == ds.signal_index[static_cast<size_t>(i)])
    throw std::invalid_argument(
        "check_noise_gradient_identity: patch j is the signal patch");
  if (ds.P < 2)
    throw std::invalid_argument("check_noise_gradient_identity: no noise patches");

  const auto target = ds.patches.row(ds.row_of(i, j));

  const Weights grad = gradient(W, ds, lambda);
  const double ridge_part = lambda * W.row(r).dot(target);
  const double measured = grad.row(r).dot(target) - ridge_part;

  // Expansion of the gradient row in the patch basis: signal patches are
  // orthogonal to every noise patch, so only noise patches contribute,
  // sample a and patch k with coefficient (3/N) y_a ell_a <w_r, X_a[k]>^2.
  const LossReport report = loss(W, ds, 0.0);
  double closed = 0.0;
  for (int a = 0; a < ds.n; ++a) {
    const double y = static_cast<double>(ds.labels[static_cast<size_t>(a)]);
    const double ell = report.per_sample_derivative(a);
    const int sig = ds.signal_index[static_cast<size_t>(a)];
    for (int k = 0; k < ds.P; ++k) {
      if (k == sig) continue;
      const auto patch = ds.patches.row(ds.row_of(a, k));
      const double xi = W.row(r).dot(patch);
      closed += y * ell * xi * xi * patch.dot(target);
    }
  }
  closed *= -3.0 / static_cast<double>(ds.n);
  return rel_err(measured, closed);
}

namespace {

void require_rows(const Trace& trace) {
  if (trace.rows.size() < 2)
    throw std::invalid_argument("recursion check needs at least two trace rows");
}

}  // namespace

double check_gd_signal_recursion(const Trace& trace, const Dataset& ds) {
  if (trace.optimizer != OptimizerKind::GD)
    throw std::invalid_argument("check_gd_signal_recursion: trace is not a GD run");
  require_rows(trace);
  const double a3 = ds.alpha * ds.alpha * ds.alpha;
  const double b3 = ds.beta * ds.beta * ds.beta;

  double worst = 0.0;
  for (size_t t = 0; t + 1 < trace.rows.size(); ++t) {
    const TraceRow& cur = trace.rows[t];
    const TraceRow& next = trace.rows[t + 1];
    const double coef = 3.0 * cur.eta_t * (a3 * cur.nu1 + b3 * cur.nu2);
    for (Eigen::Index r = 0; r < cur.c.size(); ++r) {
      const double predicted = cur.c(r) + coef * cur.c(r) * cur.c(r);
      worst = std::max(worst, rel_err(next.c(r), predicted));
    }
  }
  return worst;
}

GdmRecursionErrors check_gdm_signal_recursion(const Trace& trace, const Dataset& ds) {
  if (trace.optimizer != OptimizerKind::GDM)
    throw std::invalid_argument("check_gdm_signal_recursion: trace is not a GD+M run");
  require_rows(trace);
  const double a3 = ds.alpha * ds.alpha * ds.alpha;
  const double b3 = ds.beta * ds.beta * ds.beta;
  const double gamma = trace.gamma;

  GdmRecursionErrors errs;
  for (size_t t = 0; t + 1 < trace.rows.size(); ++t) {
    const TraceRow& cur = trace.rows[t];
    const TraceRow& next = trace.rows[t + 1];
    const double coef = 3.0 * (1.0 - gamma) * (a3 * cur.nu1 + b3 * cur.nu2);
    for (Eigen::Index r = 0; r < cur.c.size(); ++r) {
      const double predicted_mom = gamma * cur.mom_sig(r) - coef * cur.c(r) * cur.c(r);
      errs.momentum = std::max(errs.momentum, rel_err(next.mom_sig(r), predicted_mom));
      const double predicted_c = cur.c(r) - cur.eta_t * next.mom_sig(r);
      errs.signal = std::max(errs.signal, rel_err(next.c(r), predicted_c));
    }
  }
  return errs;
}

double empirical_rate_check(const Trace& trace, long t_start) {
  if (trace.rows.empty()) throw std::invalid_argument("empirical_rate_check: empty trace");
  if (t_start >= static_cast<long>(trace.rows.size()))
    throw std::invalid_argument("empirical_rate_check: t_start beyond trace");
  double worst = 0.0;
  for (const TraceRow& row : trace.rows) {
    if (row.t < t_start) continue;
    const double weighted = static_cast<double>(row.t - t_start + 1) * row.loss;
    worst = std::max(worst, weighted);
  }
  return worst;
}

long count_saturated_steps(const Trace& trace, double kappa) {
  const double threshold = neg_sigmoid(kappa);
  long count = 0;
  for (const TraceRow& row : trace.rows)
    if (row.nu1 + row.nu2 < threshold) ++count;
  return count;
}

double sigmoid_loss_sandwich_violation(int grid_points, double x_max) {
  double worst = 0.0;
  for (int k = 1; k <= grid_points; ++k) {
    const double x = x_max * static_cast<double>(k) / static_cast<double>(grid_points);
    const double s = neg_sigmoid(x);
    const double l = softplus_neg(x);
    // Violation factors relative to both sides of
    // 0.1 * l <= s <= 10 * l.
    worst = std::max(worst, 0.1 * l / s);
    worst = std::max(worst, s / (10.0 * l));
  }
  return worst;
}

}  // namespace momlab
