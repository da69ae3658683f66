#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace cwpor {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// Lowercase hex SHA-256 of a file's bytes. Throws cwpor::Error on I/O failure.
std::string sha256_file_hex(const std::filesystem::path& path);

// SplitMix64 finalizer. Used as the mixing step of every counter-based
// stream in the harness so results never depend on call order.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic 64-bit value for (seed, counter). Stateless.
constexpr std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t counter) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632BE59BD9B4E019ull));
}

// Small seeded stream with a portable bounded draw (std:: distributions are
// implementation-defined, which would break byte-identical logs across
// standard libraries).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(keyed_u64(seed, stream)) {}

  std::uint64_t next() noexcept { return keyed_u64(key_, counter_++); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stable 64-bit FNV-1a, for keying streams by text identifiers.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace cwpor
