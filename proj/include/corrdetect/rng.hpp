#pragma once

#include <cstdint>
#include <random>

namespace corrdetect {

// Role tags mixed into derived seeds so that the streams feeding different
// parts of one experiment never coincide.
enum class SeedTag : std::uint64_t {
  null_data = 1,
  alt_data = 2,
  hidden = 3,
  trial = 4,
  calibration = 5,
  detector = 6,
  moment = 7,
  chunk = 8,
};

std::uint64_t splitmix64(std::uint64_t& state);

// Counter-based split: a pure function of (master, tag, index).
std::uint64_t derive_seed(std::uint64_t master, SeedTag tag, std::uint64_t index);

// The generator behind every sampler. Uniforms take the top 53 bits of
// mt19937_64; normals use the Marsaglia polar method. Both are implemented
// here rather than through <random> distributions, whose output is not
// pinned across standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                       // [0, 1)
  double normal();                        // N(0, 1)
  std::uint64_t below(std::uint64_t n);   // uniform on {0, ..., n-1}, n >= 1
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace corrdetect
