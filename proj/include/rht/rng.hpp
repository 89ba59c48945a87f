#pragma once

#include <cstdint>
#include <limits>

namespace rht {

/// SplitMix64: counter-based generator. Cheap to seed, arbitrary jumps by
/// construction, and every (seed, stream, index) triple yields an
/// independent stream, so paths can be sampled in any order or thread.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Mixes words into a single well-scrambled 64-bit value.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

/// Purpose tags keep the field stream independent of the path streams.
enum class RngStream : std::uint64_t {
  Field = 0x464c44,
  Paths = 0x505448,
};

/// Stream = hash(seed, purpose, index); one generator per Monte Carlo path.
inline SplitMix64 make_rng(std::uint64_t seed, RngStream stream, std::uint64_t index = 0) {
  std::uint64_t s = mix64(seed + 0x9e3779b97f4a7c15ULL);
  s = mix64(s ^ static_cast<std::uint64_t>(stream));
  s = mix64(s ^ index);
  return SplitMix64(s);
}

}  // namespace rht
