#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace rcofdma {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a stream id.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t x = master ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
  splitmix64(x);
  return splitmix64(x);
}

/// xoshiro256++ with inline Box-Muller draws. std <random> distributions are
/// implementation-defined, so draws are spelled out here to keep run traces
/// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
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

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform01_open_low() { return 1.0 - uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// N(0, sigma^2) via Box-Muller (one variate per pair of uniforms).
  double normal(double sigma) {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Circularly-symmetric complex normal CN(0, variance).
  std::complex<double> cnormal(double variance) {
    const double s = std::sqrt(variance * 0.5);
    return {normal(s), normal(s)};
  }

  /// Unit-mean exponential.
  double exponential() { return -std::log(uniform01_open_low()); }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace rcofdma
