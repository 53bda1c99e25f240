#include "momlab/data.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace momlab {

Sample Dataset::sample(int i) const {
  Sample s;
  s.patches = patches.middleRows(static_cast<Eigen::Index>(i) * P, P);
  s.label = labels[static_cast<size_t>(i)];
  s.margin_class = margin_class[static_cast<size_t>(i)];
  s.signal_index = signal_index[static_cast<size_t>(i)];
  return s;
}

Eigen::VectorXd make_wstar(int d) {
  if (d < 1) throw std::invalid_argument("make_wstar: d must be >= 1");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  w(0) = 1.0;
  return w;
}

namespace {

// Fills `row` with one noise patch: d Gaussian draws, then the projection
// off wstar = e1, which just zeroes the first coordinate. Drawing the full
// d values keeps the stream layout independent of the projection.
template <typename RowXpr>
void fill_noise_patch(RowXpr row, int d, double sigma, Rng& rng) {
  for (int k = 0; k < d; ++k) row(k) = sigma * rng.normal();
  row(0) = 0.0;
}

}  // namespace

Sample sample_point(const ExperimentConfig& cfg, Rng& rng) {
  cfg.validate();
  Sample s;
  s.label = rng.bernoulli(0.5) ? 1 : -1;
  s.margin_class = rng.bernoulli(cfg.mu) ? MarginClass::Z2 : MarginClass::Z1;
  s.signal_index = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.P)));

  const double theta = s.margin_class == MarginClass::Z2 ? cfg.beta : cfg.alpha;
  s.patches.setZero(cfg.P, cfg.d);
  for (int j = 0; j < cfg.P; ++j) {
    if (j == s.signal_index) {
      s.patches(j, 0) = theta * static_cast<double>(s.label);
    } else {
      fill_noise_patch(s.patches.row(j), cfg.d, cfg.sigma, rng);
    }
  }
  return s;
}

Dataset sample_dataset(const ExperimentConfig& cfg, std::uint64_t stream_tag, int count) {
  cfg.validate();
  if (count < 1) throw std::invalid_argument("sample_dataset: count must be >= 1");

  Dataset ds;
  ds.n = count;
  ds.P = cfg.P;
  ds.d = cfg.d;
  ds.alpha = cfg.alpha;
  ds.beta = cfg.beta;
  ds.wstar = make_wstar(cfg.d);
  ds.patches.setZero(static_cast<Eigen::Index>(count) * cfg.P, cfg.d);
  ds.labels.resize(static_cast<size_t>(count));
  ds.margin_class.resize(static_cast<size_t>(count));
  ds.signal_index.resize(static_cast<size_t>(count));

  long n_z2 = 0;
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::stream(cfg.seed, stream_tag, static_cast<std::uint64_t>(i));
    const int label = rng.bernoulli(0.5) ? 1 : -1;
    const MarginClass cls = rng.bernoulli(cfg.mu) ? MarginClass::Z2 : MarginClass::Z1;
    const int sig = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.P)));
    const double theta = cls == MarginClass::Z2 ? cfg.beta : cfg.alpha;

    ds.labels[static_cast<size_t>(i)] = static_cast<std::int8_t>(label);
    ds.margin_class[static_cast<size_t>(i)] = cls;
    ds.signal_index[static_cast<size_t>(i)] = sig;
    if (cls == MarginClass::Z2) ++n_z2;

    for (int j = 0; j < cfg.P; ++j) {
      auto row = ds.patches.row(ds.row_of(i, j));
      if (j == sig) {
        row(0) = theta * static_cast<double>(label);
      } else {
        fill_noise_patch(row, cfg.d, cfg.sigma, rng);
      }
    }
  }
  ds.z2_fraction = static_cast<double>(n_z2) / static_cast<double>(count);
  return ds;
}

void export_dataset_csv(const Dataset& ds, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f, "# n=%d P=%d d=%d alpha=%.17g beta=%.17g\n", ds.n, ds.P, ds.d,
               ds.alpha, ds.beta);
  for (int i = 0; i < ds.n; ++i) {
    std::fprintf(f, "%d,%d,%d", static_cast<int>(ds.labels[static_cast<size_t>(i)]),
                 static_cast<int>(ds.margin_class[static_cast<size_t>(i)]),
                 ds.signal_index[static_cast<size_t>(i)]);
    for (int j = 0; j < ds.P; ++j)
      for (int k = 0; k < ds.d; ++k)
        std::fprintf(f, ",%.17g", ds.patches(ds.row_of(i, j), k));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

Dataset import_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string header;
  std::getline(in, header);
  Dataset ds;
  if (std::sscanf(header.c_str(), "# n=%d P=%d d=%d alpha=%lg beta=%lg", &ds.n, &ds.P,
                  &ds.d, &ds.alpha, &ds.beta) != 5)
    throw std::runtime_error("malformed dataset header in " + path);
  if (ds.n < 1 || ds.P < 1 || ds.d < 1)
    throw std::runtime_error("invalid dataset dimensions in " + path);

  ds.wstar = make_wstar(ds.d);
  ds.patches.setZero(static_cast<Eigen::Index>(ds.n) * ds.P, ds.d);
  ds.labels.resize(static_cast<size_t>(ds.n));
  ds.margin_class.resize(static_cast<size_t>(ds.n));
  ds.signal_index.resize(static_cast<size_t>(ds.n));

  long n_z2 = 0;
  std::string line;
  for (int i = 0; i < ds.n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated dataset file");
    std::stringstream ss(line);
    std::string tok;
    auto next = [&]() {
      if (!std::getline(ss, tok, ',')) throw std::runtime_error("short dataset row");
      return tok;
    };
    ds.labels[static_cast<size_t>(i)] = static_cast<std::int8_t>(std::stoi(next()));
    const int cls = std::stoi(next());
    if (cls != 1 && cls != 2) throw std::runtime_error("bad margin class");
    ds.margin_class[static_cast<size_t>(i)] = static_cast<MarginClass>(cls);
    if (cls == 2) ++n_z2;
    ds.signal_index[static_cast<size_t>(i)] = std::stoi(next());
    for (int j = 0; j < ds.P; ++j)
      for (int k = 0; k < ds.d; ++k)
        ds.patches(ds.row_of(i, j), k) = std::stod(next());
  }
  ds.z2_fraction = static_cast<double>(n_z2) / static_cast<double>(ds.n);
  return ds;
}

}  // namespace momlab
