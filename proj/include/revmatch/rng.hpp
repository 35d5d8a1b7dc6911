#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace revmatch {

// Deterministic generator used everywhere randomness is needed. We avoid
// std::shuffle / std::uniform_int_distribution because their outputs are
// implementation-defined; every draw here is reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double next_unit();

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound);

  double next_uniform(double lo, double hi);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives a named sub-seed from a base run seed, so shuffle/init/dropout
// streams stay independent and individually reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::string_view name,
                          std::uint64_t index = 0);

}  // namespace revmatch
