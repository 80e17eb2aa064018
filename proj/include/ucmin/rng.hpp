#pragma once

#include <cmath>
#include <cstdint>

namespace ucmin {

// Counter-based generator (splitmix64 walk). The stream is a pure function of
// (key, counter), so per-trial streams derived from a master seed are
// independent of execution order and of how many trials run.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), ctr_(counter) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Key for sub-stream `index` of `key` (trial keys from the master seed,
  // per-iteration keys from a trial key). Adding streams never reshuffles
  // existing ones.
  static std::uint64_t derive(std::uint64_t key, std::uint64_t index) {
    return mix(mix(key) ^ (0xd1342543de82ef95ULL * (index + 1)));
  }

  std::uint64_t next_u64() {
    return mix(key_ + 0x9e3779b97f4a7c15ULL * ctr_++);
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // One standard normal via Box-Muller (two uniforms per draw; no caching so
  // the counter consumption per call is fixed).
  double normal() {
    const double u = uniform_pos();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return ctr_; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace ucmin
