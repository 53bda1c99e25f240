#ifndef MOMLAB_RNG_HPP
#define MOMLAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace momlab {

// Deterministic, splittable random streams.
//
// Every stream is identified by (seed, tag, index). The generator is
// xoshiro256++ seeded through splitmix64, with Box-Muller normals. All
// outputs are reproducible bit-for-bit given the stream id and the call
// order, independent of the standard library in use.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) { init(seed); }

  // Derives an independent substream. Streams with distinct (seed, tag,
  // index) triples are decorrelated; sampling order across substreams
  // does not matter.
  static Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s);
    s ^= tag * 0x9e3779b97f4a7c15ULL;
    mixed ^= splitmix64(s);
    s ^= index + 0x632be59bd9b4e019ULL;
    mixed ^= splitmix64(s);
    return Rng(mixed);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller; generates values in pairs.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  void init(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
    has_cached_ = false;
    cached_ = 0.0;
  }

  std::uint64_t s_[4];
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Stream tags used by the pipeline. Train data, test data and weight
// initialization draw from independent substreams of the same seed.
inline constexpr std::uint64_t kStreamTrain = 0x747261696eULL;
inline constexpr std::uint64_t kStreamTest = 0x74657374ULL;
inline constexpr std::uint64_t kStreamInit = 0x696e6974ULL;

}  // namespace momlab

#endif  // MOMLAB_RNG_HPP
