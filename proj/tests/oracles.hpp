#ifndef MOMLAB_TESTS_ORACLES_HPP
#define MOMLAB_TESTS_ORACLES_HPP

// Test-only oracles, kept independent of the code paths they check.

#include <functional>

#include "momlab/data.hpp"
#include "momlab/model.hpp"
#include "momlab/rng.hpp"

namespace momlab::testing {

// Central finite differences of a scalar function of the weights.
inline Weights fd_gradient(const std::function<double(const Weights&)>& f,
                           const Weights& W, double h = 1e-5) {
  Weights g(W.rows(), W.cols());
  for (Eigen::Index r = 0; r < W.rows(); ++r) {
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
      Weights plus = W, minus = W;
      plus(r, c) += h;
      minus(r, c) -= h;
      g(r, c) = (f(plus) - f(minus)) / (2.0 * h);
    }
  }
  return g;
}

// Small random problem instance for identity and gradient checks.
struct TinyInstance {
  ExperimentConfig cfg;
  Dataset ds;
  Weights W;
};

inline TinyInstance random_tiny_instance(Rng& rng, int min_P = 2) {
  ExperimentConfig cfg = ExperimentConfig::defaults(2 + static_cast<int>(rng.uniform_int(7)));
  cfg.P = min_P + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(4 - min_P)));
  cfg.m = 1 + static_cast<int>(rng.uniform_int(3));
  cfg.N = 2 + static_cast<int>(rng.uniform_int(9));
  cfg.n_test = 1;
  cfg.mu = 0.3;
  cfg.seed = rng.next_u64();

  TinyInstance inst{cfg, make_train_dataset(cfg), Weights(cfg.m, cfg.d)};
  for (int r = 0; r < cfg.m; ++r)
    for (int k = 0; k < cfg.d; ++k) inst.W(r, k) = 0.5 * rng.normal();
  return inst;
}

}  // namespace momlab::testing

#endif  // MOMLAB_TESTS_ORACLES_HPP
