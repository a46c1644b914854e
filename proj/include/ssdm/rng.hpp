#pragma once

#include <cstdint>
#include <string_view>

namespace ssdm {

uint64_t fnv1a64(std::string_view bytes);
uint64_t fnv1a64(const void* data, size_t len);

// Counter-based generator: the n-th output is a pure function of
// (seed, stream, n), so independently derived streams never interact and the
// sequence is identical on every platform. The mixer is splitmix64.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);
  Rng(uint64_t seed, std::string_view stream_name);

  // Child generator for a named substream; counter starts at zero.
  Rng fork(std::string_view name) const;
  Rng fork(uint64_t index) const;

  uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer on [0, n); rejection sampling keeps it unbiased and
  // platform independent.
  uint64_t uniform_int(uint64_t n);

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

 private:
  uint64_t seed_ = 0;
  uint64_t stream_ = 0;
  uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace ssdm
