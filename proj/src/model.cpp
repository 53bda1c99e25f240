#include "momlab/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace momlab {

double neg_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

double softplus_neg(double x) {
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

namespace {

inline double cube(double v) { return v * v * v; }

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

void check_shapes(const Weights& W, const Dataset& ds, const char* where) {
  if (W.cols() != ds.d)
    throw std::invalid_argument(std::string(where) + ": weight/patch dimension mismatch");
  if (ds.n < 1) throw std::invalid_argument(std::string(where) + ": empty dataset");
}

}  // namespace

double forward(const Weights& W, const Eigen::MatrixXd& patches) {
  if (W.cols() != patches.cols())
    throw std::invalid_argument("forward: weight/patch dimension mismatch");
  const Eigen::MatrixXd U = W * patches.transpose();  // m x P
  double f = 0.0;
  for (Eigen::Index r = 0; r < U.rows(); ++r)
    for (Eigen::Index j = 0; j < U.cols(); ++j) f += cube(U(r, j));
  return f;
}

void loss_and_gradient(const Weights& W, const Dataset& ds, double lambda,
                       LossReport& report, Weights& grad, NoiseStats* noise) {
  check_shapes(W, ds, "loss_and_gradient");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");

  const int n = ds.n;
  const int P = ds.P;
  const Eigen::Index m = W.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double scale = 3.0 * inv_n;

  // All weight/patch inner products at once: column i*P+j holds
  // <w_r, X_i[j]> for each neuron r.
  Eigen::MatrixXd U = W * ds.patches.transpose();  // m x (n*P)

  report.per_sample_margin.resize(n);
  report.per_sample_derivative.resize(n);

  KahanSum data_sum, nu1_sum, nu2_sum;
  double xi_sq_max = 0.0;
  double xi_total_max = -std::numeric_limits<double>::infinity();
  double xi_total_z2_max = -std::numeric_limits<double>::infinity();
  bool any_z2 = false;

  for (int i = 0; i < n; ++i) {
    const Eigen::Index base = static_cast<Eigen::Index>(i) * P;
    const double y = static_cast<double>(ds.labels[static_cast<size_t>(i)]);
    const int sig = ds.signal_index[static_cast<size_t>(i)];

    double f = 0.0;
    for (Eigen::Index r = 0; r < m; ++r)
      for (int j = 0; j < P; ++j) f += cube(U(r, base + j));

    const double margin = y * f;
    const double ell = neg_sigmoid(margin);
    report.per_sample_margin(i) = margin;
    report.per_sample_derivative(i) = ell;
    data_sum.add(softplus_neg(margin));
    if (ds.is_z2(i)) nu2_sum.add(ell); else nu1_sum.add(ell);

    if (noise) {
      // Xi_i = sum_{r, j != P(i)} y_i <w_r, X_i[j]>^3, taken before U is
      // repurposed below.
      double xi_total = 0.0;
      for (Eigen::Index r = 0; r < m; ++r)
        for (int j = 0; j < P; ++j)
          if (j != sig) {
            const double u = U(r, base + j);
            const double xi_sq = u * u;
            if (xi_sq > xi_sq_max) xi_sq_max = xi_sq;
            xi_total += y * xi_sq * u;
          }
      if (xi_total > xi_total_max) xi_total_max = xi_total;
      if (ds.is_z2(i)) {
        any_z2 = true;
        if (xi_total > xi_total_z2_max) xi_total_z2_max = xi_total;
      }
    }

    // Reuse U in place as the per-patch gradient coefficients
    // s_i * <w_r, X_i[j]>^2 with s_i = (3/N) y_i ell_i, so the gradient
    // becomes one matrix product with the packed patches.
    const double s = scale * y * ell;
    for (Eigen::Index r = 0; r < m; ++r) {
      for (int j = 0; j < P; ++j) {
        const double u = U(r, base + j);
        U(r, base + j) = s * u * u;
      }
    }
  }

  grad.resize(m, ds.d);
  grad.noalias() = -(U * ds.patches);
  if (lambda > 0.0) grad += lambda * W;

  report.data_term = inv_n * data_sum.sum;
  report.reg_term = 0.5 * lambda * W.squaredNorm();
  report.total = report.data_term + report.reg_term;
  report.nu1 = inv_n * nu1_sum.sum;
  report.nu2 = inv_n * nu2_sum.sum;

  if (noise) {
    noise->xi_sq_max = xi_sq_max;
    noise->xi_total_max = xi_total_max;
    noise->xi_total_z2_max = any_z2 ? xi_total_z2_max
                                    : std::numeric_limits<double>::quiet_NaN();
  }
}

LossReport loss(const Weights& W, const Dataset& ds, double lambda) {
  LossReport report;
  Weights grad;
  loss_and_gradient(W, ds, lambda, report, grad, nullptr);
  return report;
}

Weights gradient(const Weights& W, const Dataset& ds, double lambda) {
  LossReport report;
  Weights grad;
  loss_and_gradient(W, ds, lambda, report, grad, nullptr);
  return grad;
}

Derivatives per_sample_derivatives(const Weights& W, const Dataset& ds) {
  const LossReport report = loss(W, ds, 0.0);
  Derivatives out;
  out.nu1 = report.nu1;
  out.nu2 = report.nu2;
  out.ell = report.per_sample_derivative;
  return out;
}

void save_weights_json(const Weights& W, const std::string& path) {
  nlohmann::json j;
  j["m"] = W.rows();
  j["d"] = W.cols();
  std::vector<double> rows;
  rows.reserve(static_cast<size_t>(W.size()));
  for (Eigen::Index r = 0; r < W.rows(); ++r)
    for (Eigen::Index c = 0; c < W.cols(); ++c) rows.push_back(W(r, c));
  j["rows"] = rows;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

Weights load_weights_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  nlohmann::json j;
  in >> j;
  const Eigen::Index m = j.at("m").get<Eigen::Index>();
  const Eigen::Index d = j.at("d").get<Eigen::Index>();
  const auto rows = j.at("rows").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(rows.size()) != m * d)
    throw std::runtime_error("weight entry count mismatch in " + path);
  Weights W(m, d);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < d; ++c) W(r, c) = rows[static_cast<size_t>(r * d + c)];
  return W;
}

}  // namespace momlab
