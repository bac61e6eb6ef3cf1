#ifndef PFOLIO_RANDOM_HPP
#define PFOLIO_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pfolio {

// All randomized components draw from std::mt19937_64 through the helpers
// below. The standard distributions are implementation-defined, so we roll
// our own to keep seeded runs reproducible across toolchains.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

inline double normal(Rng& rng, double mean, double stddev) {
  // Box-Muller; one value per call keeps the stream position predictable.
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[uniform_index(rng, i)]);
  }
}

}  // namespace pfolio

#endif
