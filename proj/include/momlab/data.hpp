#ifndef MOMLAB_DATA_HPP
#define MOMLAB_DATA_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "momlab/config.hpp"
#include "momlab/rng.hpp"

namespace momlab {

enum class MarginClass : std::int8_t { Z1 = 1, Z2 = 2 };

// One labelled input: P patches of dimension d. Exactly one patch (the
// signal patch) equals theta * y * wstar with theta in {alpha, beta}; the
// others are Gaussian noise supported on the orthogonal complement of
// wstar, i.e. their first coordinate is exactly zero.
struct Sample {
  Eigen::MatrixXd patches;  // P x d, row j = patch j
  int label = 1;            // y in {-1, +1}
  MarginClass margin_class = MarginClass::Z1;
  int signal_index = 0;     // position of the signal patch in [0, P)
};

// Training or test set. Patches are stored packed, one row per patch
// (sample i, patch j lives at row i*P + j), so batched linear algebra can
// run over the whole set at once; `sample(i)` materializes the per-sample
// view when convenient.
struct Dataset {
  Eigen::MatrixXd patches;  // (n*P) x d
  std::vector<std::int8_t> labels;
  std::vector<MarginClass> margin_class;
  std::vector<std::int32_t> signal_index;
  Eigen::VectorXd wstar;
  double alpha = 0.0;
  double beta = 0.0;
  double z2_fraction = 0.0;
  int n = 0;
  int P = 0;
  int d = 0;

  int size() const { return n; }
  int row_of(int i, int j) const { return i * P + j; }
  bool is_z2(int i) const { return margin_class[static_cast<size_t>(i)] == MarginClass::Z2; }
  double theta(int i) const { return is_z2(i) ? beta : alpha; }
  Sample sample(int i) const;
};

// The feature direction: the distribution is rotation invariant, so it is
// pinned to the first standard basis vector. This makes the orthogonality
// of the noise patches exact rather than approximate.
Eigen::VectorXd make_wstar(int d);

// Draws one sample from the synthetic distribution: uniform label, margin
// class Z2 with probability mu, uniform signal position, noise patches
// drawn as N(0, sigma^2 I_d) and then projected off wstar (coordinate one
// set to zero).
Sample sample_point(const ExperimentConfig& cfg, Rng& rng);

// Draws `count` independent samples. Sample i uses the substream
// (cfg.seed, stream_tag, i), so generation is order independent and
// bit-reproducible.
Dataset sample_dataset(const ExperimentConfig& cfg, std::uint64_t stream_tag, int count);

inline Dataset make_train_dataset(const ExperimentConfig& cfg) {
  return sample_dataset(cfg, kStreamTrain, cfg.N);
}
inline Dataset make_test_dataset(const ExperimentConfig& cfg) {
  return sample_dataset(cfg, kStreamTest, cfg.n_test);
}

// Debug export/import: one row per sample holding y, margin class, signal
// index and the P*d patch entries, printed so they round-trip exactly.
void export_dataset_csv(const Dataset& ds, const std::string& path);
Dataset import_dataset_csv(const std::string& path);

}  // namespace momlab

#endif  // MOMLAB_DATA_HPP
