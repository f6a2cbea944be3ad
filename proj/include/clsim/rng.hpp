#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace clsim {

// SplitMix64: splittable 64-bit generator used to derive independent
// per-task stream seeds from a (seed, task index) pair.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// Stream seed for task t under master seed s. Advancing SplitMix64 t+1
// times keeps the streams decorrelated for arbitrary task indices.
inline std::uint64_t task_stream_seed(std::uint64_t seed, std::size_t task) {
  SplitMix64 sm(seed);
  std::uint64_t out = 0;
  for (std::size_t i = 0; i <= task; ++i) out = sm.next();
  return out;
}

// Mix two 64-bit values into one (cell/rep seed derivation in sweeps).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 sm(a ^ (0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2)));
  sm.next();
  return sm.next();
}

// Standard-normal source with an explicit Box-Muller transform so the
// sample stream is pinned by this code rather than by the standard
// library's unspecified normal_distribution algorithm.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller on two uniforms in (0,1].
    double u1 = uniform_open();
    double u2 = uniform_open();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double uniform_open() {
    // (0,1]: avoids log(0) in Box-Muller.
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace clsim
