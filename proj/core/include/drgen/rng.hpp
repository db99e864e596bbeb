#pragma once

#include <cstdint>
#include <string_view>

namespace drgen {

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// High 64 bits of the 128-bit product a * b.
inline std::uint64_t mul_high(std::uint64_t a, std::uint64_t b) noexcept {
  __extension__ using U128 = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<U128>(a) * b) >> 64);
}

/// Deterministic SplitMix64 stream.
///
/// Every draw is defined by integer arithmetic only, so a given stream
/// produces the same sequence on every platform and in every language
/// that re-implements these few lines:
///
///   next_u64:  state += 0x9E3779B97F4A7C15
///              z = state
///              z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///              return z ^ (z >> 31)
///   next_unit: (next_u64() >> 11) * 2^-53            in [0, 1)
///   next_uniform(lo, hi): lo + (hi - lo) * next_unit()
///   next_int(lo, hi): span = hi - lo + 1 (mod 2^64)
///              if span == 0: return lo + next_u64()   (full 64-bit range)
///              return lo + floor(next_u64() * span / 2^64)
///              (128-bit multiply, high word; no rejection step)
class RandomStream {
 public:
  explicit constexpr RandomStream(std::uint64_t state) noexcept : state_(state) {}

  std::uint64_t next_u64() noexcept;
  double next_unit() noexcept;
  double next_uniform(double lo, double hi) noexcept;
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) noexcept;
  bool next_bernoulli(double p) noexcept { return next_unit() < p; }

  std::uint64_t state() const noexcept { return state_; }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  std::uint64_t state_;
};

/// Stream identified by (master_seed, purpose_tag, index). Initial state is
/// master_seed ^ fnv1a64(tag) ^ (index * 0x9E3779B97F4A7C15).
/// Throws ValidationError on an empty tag.
RandomStream derive_stream(std::uint64_t master_seed, std::string_view purpose_tag,
                           std::uint64_t index);

}  // namespace drgen
