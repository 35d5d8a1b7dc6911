#include "revmatch/rng.hpp"

namespace revmatch {

namespace {
// splitmix64 (Steele/Lea/Flood); small state, passes BigCrush when used
// as a stream generator, and trivially portable.
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  // Rejection sampling to stay unbiased.
  std::uint64_t threshold = (0ULL - bound) % bound;
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double Rng::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_unit();
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view name,
                          std::uint64_t index) {
  // FNV-1a over the name, folded with the base seed and index, then mixed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = base ^ h ^ (index * 0x9e3779b97f4a7c15ULL + 0x1234567);
  return splitmix64(state);
}

}  // namespace revmatch
