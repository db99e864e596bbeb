#include "drgen/rng.hpp"

#include "drgen/errors.hpp"

namespace drgen {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::uint64_t RandomStream::next_u64() noexcept {
  state_ += kGolden;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RandomStream::next_unit() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_uniform(double lo, double hi) noexcept {
  if (lo == hi) {
    next_u64();  // keep the draw count independent of the range
    return lo;
  }
  return lo + (hi - lo) * next_unit();
}

std::int64_t RandomStream::next_int(std::int64_t lo, std::int64_t hi) noexcept {
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  const std::uint64_t x = next_u64();
  if (span == 0) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x);
  }
  const std::uint64_t offset = mul_high(x, span);
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + offset);
}

RandomStream derive_stream(std::uint64_t master_seed, std::string_view purpose_tag,
                           std::uint64_t index) {
  if (purpose_tag.empty()) {
    throw ValidationError("derive_stream: purpose tag must not be empty");
  }
  return RandomStream(master_seed ^ fnv1a64(purpose_tag) ^ (index * kGolden));
}

}  // namespace drgen
