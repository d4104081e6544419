#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace bss {

// std::mt19937_64's output sequence is fixed by the standard, the
// std::*_distribution mappings are not. Everything below maps raw engine
// output by hand so seeded results are identical across standard libraries.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a master seed with job coordinates into an independent stream seed.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> parts) {
  auto h = splitmix64(master);
  for (auto const p : parts) {
    h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  }
  return h;
}

class rng {
public:
  explicit rng(std::uint64_t seed) : engine_{seed} {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n), unbiased by rejection.
  std::uint64_t index(std::uint64_t n) {
    auto const limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform integer on [lo, hi].
  int between(int lo, int hi) {
    return lo + static_cast<int>(index(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal(double mean = 0.0, double sd = 1.0) {
    // Box-Muller, one draw per call.
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    double const u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace bss
