#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace necsel {

/// 64-bit finalizer from splitmix64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over the bytes of `s`.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stream key for a (master_seed, label, index) triple. The exact
/// construction is documented in docs/FORMATS.md and must never change:
/// fixed draw tables in the test suite depend on it.
constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::string_view label,
                                   std::uint64_t index) noexcept {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  const std::uint64_t a = mix64(master_seed + golden);
  const std::uint64_t b = mix64(a ^ fnv1a64(label));
  return mix64(b + golden * (index + 1));
}

// Deterministic random stream. State is a pure function of the derivation
// triple, so a stream is reproducible across processes and thread schedules.
// Satisfies UniformRandomBitGenerator, but the library never routes draws
// through <random> distributions (their output is implementation-defined).
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::string label, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next_u64(); }

  // xoshiro256**
  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in the open interval (0, 1).
  double uniform_open01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const std::string& label() const noexcept { return label_; }
  std::uint64_t index() const noexcept { return index_; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t master_seed_;
  std::string label_;
  std::uint64_t index_;
  std::array<std::uint64_t, 4> s_{};
};

inline RngStream derive_stream(std::uint64_t master_seed, std::string label,
                               std::uint64_t index) {
  return RngStream(master_seed, std::move(label), index);
}

}  // namespace necsel
