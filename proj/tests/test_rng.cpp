#include <doctest.h>

#include <cmath>

#include "ssdm/rng.hpp"

using namespace ssdm;

TEST_CASE("identical seed and call sequence reproduce identical values") {
  Rng a(1234, "stream");
  Rng b(1234, "stream");
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(1234, "stream");
  Rng d(1234, "stream");
  for (int i = 0; i < 50; ++i) CHECK(c.uniform() == d.uniform());
  for (int i = 0; i < 50; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("streams are independent of each other") {
  Rng a(5, "alpha");
  Rng b(5, "beta");
  int same = 0;
  for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
  CHECK(same == 0);
}

TEST_CASE("fork derives reproducible substreams") {
  Rng root(17, "root");
  Rng f1 = root.fork("child");
  Rng f2 = root.fork("child");
  CHECK(f1.next_u64() == f2.next_u64());
  // Forking does not advance the parent.
  Rng fresh(17, "root");
  CHECK(root.next_u64() == fresh.next_u64());
}

TEST_CASE("uniform stays inside its bounds") {
  Rng rng(3, "bounds");
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-2.0, 5.0);
    CHECK(u >= -2.0);
    CHECK(u < 5.0);
  }
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_int(7) < 7);
}

TEST_CASE("normal moments are sane") {
  Rng rng(11, "normal");
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("fnv1a64 matches the published test vector") {
  // Standard FNV-1a 64-bit result for "a".
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
}
