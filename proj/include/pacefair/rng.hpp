#pragma once

// Counter-based 64-bit generator.
//
// Every draw is mix64(key + counter * kGolden), where mix64 is the SplitMix64
// finalizer. The output depends only on (key, counter), so a stream can be
// re-created at any position and independent sub-streams are obtained by
// deriving new keys. Results are identical on every platform with IEEE-754
// doubles.

#include <cstdint>

namespace pacefair {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key for stream `index` under `base`: base XOR index, scrambled.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(base ^ mix64(index * kGolden + 0x632BE59BD9B4E019ULL));
}

class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer on [0, bound); bound > 0. Lemire's rejection method.
  std::uint64_t below(std::uint64_t bound) noexcept {
    for (;;) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(bound);
      const auto low = static_cast<std::uint64_t>(prod);
      if (low >= bound || low >= (-bound) % bound) {
        return static_cast<std::uint64_t>(prod >> 64);
      }
    }
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pacefair
