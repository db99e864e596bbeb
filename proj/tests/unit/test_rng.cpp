#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>

#include "drgen/errors.hpp"
#include "drgen/rng.hpp"

using namespace drgen;

TEST_SUITE("rng") {
  TEST_CASE("splitmix64 reference values") {
    // Published outputs of the reference splitmix64.c for seed 1234567.
    RandomStream s(1234567);
    CHECK(s.next_u64() == 6457827717110365317ULL);
    CHECK(s.next_u64() == 3203168211198807973ULL);
    CHECK(s.next_u64() == 9817491932198370423ULL);
    CHECK(s.next_u64() == 4593380528125082431ULL);
    CHECK(s.next_u64() == 16408922859458223821ULL);
  }

  TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("derive_stream seeding formula") {
    const std::uint64_t seed = 42, index = 7;
    const RandomStream s = derive_stream(seed, "train/scene", index);
    CHECK(s.state() == (seed ^ fnv1a64("train/scene") ^ (index * 0x9E3779B97F4A7C15ULL)));
    CHECK_THROWS_AS(derive_stream(seed, "", 0), ValidationError);
  }

  TEST_CASE("same identity gives the same sequence") {
    RandomStream a = derive_stream(99, "scene", 3);
    RandomStream b = derive_stream(99, "scene", 3);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
  }

  TEST_CASE("distinct identities differ") {
    CHECK(derive_stream(1, "scene", 0).next_u64() != derive_stream(1, "scene", 1).next_u64());
    RandomStream a = derive_stream(1, "scene", 0);
    RandomStream b = derive_stream(1, "noise", 0);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
    CHECK(same == 0);
  }

  TEST_CASE("next_unit is the top 53 bits") {
    RandomStream a(77), b(77);
    for (int i = 0; i < 100; ++i) {
      const double u = a.next_unit();
      CHECK(u == static_cast<double>(b.next_u64() >> 11) * 0x1.0p-53);
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("next_uniform degenerate range") {
    RandomStream s(5);
    CHECK(s.next_uniform(2.5, 2.5) == 2.5);
  }

  TEST_CASE("next_unit mean") {
    RandomStream s(2024);
    double sum = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) sum += s.next_unit();
    CHECK(std::abs(sum / n - 0.5) < 0.002);
  }

  TEST_CASE("next_int(0, 1) frequency within 4 sigma") {
    RandomStream s(31337);
    const int n = 100'000;
    int ones = 0;
    std::set<std::int64_t> seen;
    for (int i = 0; i < n; ++i) {
      const auto v = s.next_int(0, 1);
      seen.insert(v);
      ones += v == 1;
    }
    CHECK(seen == std::set<std::int64_t>{0, 1});
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(ones - n / 2.0) < 4 * sigma);
  }

  TEST_CASE("next_int is the high word of x * span") {
    RandomStream a(8), b(8);
    for (int i = 0; i < 1000; ++i) {
      const auto v = a.next_int(-3, 9);
      const std::uint64_t x = b.next_u64();
      CHECK(v == -3 + static_cast<std::int64_t>(mul_high(x, 13)));
      CHECK(v >= -3);
      CHECK(v <= 9);
    }
    RandomStream full(1), raw(1);
    CHECK(static_cast<std::uint64_t>(full.next_int(INT64_MIN, INT64_MAX)) ==
          static_cast<std::uint64_t>(INT64_MIN) + raw.next_u64());
  }
}
