#ifndef MOMLAB_MODEL_HPP
#define MOMLAB_MODEL_HPP

#include <Eigen/Core>

#include "momlab/data.hpp"

namespace momlab {

// First-layer weights, one neuron per row; the second layer is fixed to
// all ones. The network output is f_W(X) = sum_r sum_j <w_r, X[j]>^3.
using Weights = Eigen::MatrixXd;

// Negative sigmoid S(x) = 1 / (1 + e^x), evaluated in the branch that
// never overflows. Strictly inside (0, 1) for |x| up to ~745.
double neg_sigmoid(double x);

// log(1 + e^{-x}) without overflow for large |x|.
double softplus_neg(double x);

struct LossReport {
  double total = 0.0;     // data_term + reg_term
  double data_term = 0.0; // (1/N) sum_i log(1 + exp(-y_i f(X_i)))
  double reg_term = 0.0;  // lambda/2 * ||W||_F^2
  double nu1 = 0.0;       // (1/N) sum_{i in Z1} ell_i
  double nu2 = 0.0;       // (1/N) sum_{i in Z2} ell_i
  Eigen::VectorXd per_sample_margin;      // y_i f(X_i)
  Eigen::VectorXd per_sample_derivative;  // ell_i = S(y_i f(X_i))
};

// Per-iteration noise summaries, computed from the same weight/patch
// products as the loss so a training step costs a single pass.
struct NoiseStats {
  double xi_sq_max = 0.0;        // max over noise projections of Xi^2
  double xi_total_max = 0.0;     // max_i of Xi_i = sum_{r,j!=P(i)} y_i Xi^3
  double xi_total_z2_max = 0.0;  // same max restricted to Z2 samples (NaN if none)
};

double forward(const Weights& W, const Eigen::MatrixXd& patches);

LossReport loss(const Weights& W, const Dataset& ds, double lambda);

Weights gradient(const Weights& W, const Dataset& ds, double lambda);

// Single pass producing the loss report, the gradient, and (optionally)
// the noise summaries at the same W. The reduction over samples is
// sequential in index order; scalar sums are compensated so the result is
// insensitive to sample order at the 1e-12 level.
void loss_and_gradient(const Weights& W, const Dataset& ds, double lambda,
                       LossReport& report, Weights& grad,
                       NoiseStats* noise = nullptr);

// Class-averaged derivatives: nu_k = (1/N) sum_{i in Z_k} ell_i.
struct Derivatives {
  double nu1 = 0.0;
  double nu2 = 0.0;
  Eigen::VectorXd ell;
};
Derivatives per_sample_derivatives(const Weights& W, const Dataset& ds);

// Checkpoint format: {"m":..., "d":..., "rows":[row-major entries]}.
void save_weights_json(const Weights& W, const std::string& path);
Weights load_weights_json(const std::string& path);

}  // namespace momlab

#endif  // MOMLAB_MODEL_HPP
