#include <cmath>
#include <vector>

#include "doctest.h"
#include "momlab/rng.hpp"

using momlab::Rng;

TEST_CASE("identical stream ids reproduce identical draws") {
  Rng a = Rng::stream(42, 1, 7);
  Rng b = Rng::stream(42, 1, 7);
  for (int k = 0; k < 100; ++k) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c = Rng::stream(42, 1, 7);
  Rng d = Rng::stream(42, 1, 7);
  for (int k = 0; k < 100; ++k) CHECK(c.normal() == d.normal());
}

TEST_CASE("distinct stream ids decorrelate") {
  Rng a = Rng::stream(42, 1, 7);
  Rng b = Rng::stream(42, 1, 8);
  Rng c = Rng::stream(42, 2, 7);
  Rng d = Rng::stream(43, 1, 7);
  const auto x = a.next_u64();
  CHECK(x != b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and normals have sane moments") {
  Rng rng(123);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("uniform_int covers the range") {
  Rng rng(9);
  std::vector<int> counts(5, 0);
  for (int k = 0; k < 5000; ++k) ++counts[rng.uniform_int(5)];
  for (int v : counts) CHECK(v > 800);
}
