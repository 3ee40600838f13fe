#pragma once

#include <cstdint>
#include <random>

namespace fxts {

/// Seeded generator with a stable stream across platforms and releases.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
/// Uniform doubles take the top 53 bits of one engine draw; normals use the
/// Box-Muller transform on two uniforms (cached second value). The standard
/// library distributions are not used because their algorithms are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fxts
