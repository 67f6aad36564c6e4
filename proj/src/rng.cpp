#include "necsel/rng.hpp"

namespace necsel {

RngStream::RngStream(std::uint64_t master_seed, std::string label, std::uint64_t index)
    : master_seed_(master_seed), label_(std::move(label)), index_(index) {
  // Expand the key with splitmix64 so the xoshiro state is never all-zero.
  std::uint64_t x = stream_key(master_seed_, label_, index_);
  for (auto& word : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    word = mix64(x);
  }
}

// Lemire's multiply-shift rejection method.
std::uint64_t RngStream::below(std::uint64_t bound) noexcept {
  __extension__ typedef unsigned __int128 u128;
  std::uint64_t x = next_u64();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace necsel
