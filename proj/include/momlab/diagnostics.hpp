#ifndef MOMLAB_DIAGNOSTICS_HPP
#define MOMLAB_DIAGNOSTICS_HPP

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "momlab/optim.hpp"

namespace momlab {

// Relative error with a floor that keeps 0 vs 0 at zero.
inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / denom;
}

struct IdentityTolerance {
  double rel_tol = 1e-10;
  // Threshold above which a sigmoid term counts as negligible over the
  // horizon; only used to annotate reports, never inside a check.
  double kappa = 0.0;
  static IdentityTolerance for_horizon(long T) {
    IdentityTolerance tol;
    tol.kappa = std::log(10.0 * static_cast<double>(std::max<long>(T, 1)));
    return tol;
  }
};

// Signal components c_r = <w_r, w*>.
Eigen::VectorXd project_signal(const Weights& W, const Eigen::VectorXd& wstar);

// All noise projections Xi_{i,j,r} = <w_r, X_i[j]> plus the per-sample
// totals Xi_i = sum_{r, j != P(i)} y_i Xi^3. Sized m x (n*P); signal
// columns are stored too but excluded from the totals.
struct NoiseProjection {
  Eigen::MatrixXd xi;        // m x (n*P)
  Eigen::VectorXd xi_total;  // n
  double at(int i, int j, int r, const Dataset& ds) const {
    return xi(r, ds.row_of(i, j));
  }
};
NoiseProjection project_noise(const Weights& W, const Dataset& ds);

// Measured <grad_r, w*> against its closed form
//   -(3/N) (alpha^3 sum_{Z1} ell_i + beta^3 sum_{Z2} ell_i) c_r^2.
// With lambda > 0 the ridge contribution lambda*c_r is removed from the
// measured side first. Returns the max relative error over neurons.
double check_signal_gradient_identity(const Weights& W, const Dataset& ds,
                                      double lambda = 0.0);

// Measured <grad_r, X_i[j]> against the expansion of the gradient in the
// patch basis: only noise patches contribute, each with coefficient
// (3/N) y_a ell_a Xi_{a,k,r}^2. Requires j != P(X_i).
double check_noise_gradient_identity(const Weights& W, const Dataset& ds, int i, int j,
                                     int r, double lambda = 0.0);

// Stepwise verification of the exact signal recursion under GD:
//   c_r^{(t+1)} = c_r^{(t)} + 3 eta_t (alpha^3 nu1 + beta^3 nu2) (c_r^{(t)})^2.
// The trace must come from a GD run with lambda = 0.
double check_gd_signal_recursion(const Trace& trace, const Dataset& ds);

// Stepwise verification of the momentum pair under GD+M:
//   G_r^{(t+1)} = gamma G_r^{(t)} - 3 (1-gamma) (alpha^3 nu1 + beta^3 nu2) (c_r^{(t)})^2
//   c_r^{(t+1)} = c_r^{(t)} - eta_t G_r^{(t+1)}.
struct GdmRecursionErrors {
  double momentum = 0.0;
  double signal = 0.0;
  double max() const { return std::max(momentum, signal); }
};
GdmRecursionErrors check_gdm_signal_recursion(const Trace& trace, const Dataset& ds);

// 1/t certificate: max over t >= t_start of (t - t_start + 1) * loss(t).
double empirical_rate_check(const Trace& trace, long t_start);

// Number of trace rows in the saturated regime, where the derivative mass
// nu1 + nu2 has fallen below S(kappa). Reporting only; no exact identity
// depends on kappa.
long count_saturated_steps(const Trace& trace, double kappa);

// Scalar sandwich between the derivative and the loss on a grid over
// (0, x_max]: 0.1 log(1+e^-x) <= S(x) <= 10 log(1+e^-x). Returns the
// worst violation factor (<= 1 means the bound holds everywhere).
double sigmoid_loss_sandwich_violation(int grid_points = 10000, double x_max = 30.0);

}  // namespace momlab

#endif  // MOMLAB_DIAGNOSTICS_HPP
