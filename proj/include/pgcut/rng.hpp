#pragma once

#include <cmath>
#include <cstdint>

namespace pgcut {

// SplitMix64: the counter-based generator used everywhere a seed appears.
// state_k = seed + (k+1)*0x9E3779B97F4A7C15 put through a fixed finalizer,
// so the k-th output is a pure function of (seed, k) and results are
// bit-identical across platforms. Substreams are derived by folding the
// stream id into the seed with the same finalizer.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return splitmix64_mix(state_);
  }

  // Uniform on [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one value per call, no caching.
  double next_normal() {
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, bound) by rejection-free multiply-shift;
  // bias is < 2^-64 * bound, negligible for the sizes used here.
  std::uint64_t next_below(std::uint64_t bound) {
    // 128-bit multiply-high.
    const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
  }

 private:
  std::uint64_t state_;
};

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(splitmix64_mix(seed ^ (0x9E3779B97F4A7C15ull * (stream + 0x632BE59BD9B4E019ull))));
}

}  // namespace pgcut
