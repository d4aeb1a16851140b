#include "pgps/rng.hpp"

#include <cmath>
#include <numbers>

namespace pgps {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

std::uint64_t splitmix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngStream::value_at(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
  // Three keyed rounds; each round is bijective in its input word.
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  return splitmix64(h ^ counter);
}

double RngStream::next_normal() {
  // Box-Muller; u1 kept away from zero so the log stays finite.
  double u1 = next_unit();
  double u2 = next_unit();
  if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace pgps
