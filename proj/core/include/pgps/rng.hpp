#pragma once

#include <cstdint>
#include <string_view>

namespace pgps {

/// Counter-based deterministic random stream: every draw is a pure function of
/// (seed, stream, counter), so parallel workers can reproduce the serial
/// sequence and a stream can be replayed from any position.
///
/// Values come from nested splitmix64 finalizer rounds keyed on the three
/// words. Statistical quality is plenty for patch sampling and weight init;
/// this is not a cryptographic generator.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  /// Pure draw: does not advance any state.
  static std::uint64_t value_at(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t counter);

  std::uint64_t next_u64() { return value_at(seed, stream, counter++); }

  /// Uniform in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// Uniform real in [lo, hi).
  double next_in(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Standard normal via Box-Muller (consumes two draws).
  double next_normal();
};

/// FNV-1a hash of a label, used to derive stable stream ids from names.
constexpr std::uint64_t stream_id(std::string_view label) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace pgps
