#pragma once

#include <cstdint>

namespace rbe {

// Counter-based generator (Philox4x32-10). A (seed, stream) pair fully
// determines the output sequence, so Monte-Carlo campaigns can hand every
// worker its own stream and still reproduce runs exactly from the recorded
// seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on {0, ..., n-1}, n >= 1.
  int uniform_int(int n);

  double normal();
  double normal(double mean, double stddev);

  // Gamma(shape, scale) via Marsaglia-Tsang.
  double gamma(double shape, double scale);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t block_[4];
  int avail_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rbe
