#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace grand {

// SplitMix64 step; also used as a finalizer so nearby seeds give unrelated streams.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t hash_mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  uint64_t s = h;
  return splitmix64(s);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t f = 1469598103934665603ULL;
  for (unsigned char c : s) {
    f ^= c;
    f *= 1099511628211ULL;
  }
  return f;
}

inline uint64_t seed_part(uint64_t h, uint64_t v) { return hash_mix(h, v); }
inline uint64_t seed_part(uint64_t h, std::string_view s) { return hash_mix(h, fnv1a64(s)); }

// Stable 64-bit seed derivation: independent sub-streams addressed by a path of
// tags (strings and integers). Adding new path values never reshuffles old ones.
template <class... Parts>
uint64_t derive_seed(uint64_t base, Parts&&... parts) {
  uint64_t s = base;
  uint64_t h = splitmix64(s);
  ((h = seed_part(h, parts)), ...);
  return h;
}

// Deterministic generator wrapper. All variate transforms are implemented here
// (not via std distributions) so results depend only on the seed and call order.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t s = seed;
    splitmix64(s);
    engine_.seed(splitmix64(s));
  }

  uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }
  // (0, 1), never returns an endpoint
  double uniform_open01() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Inclusive bounds, unbiased via rejection.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t range = uint64_t(hi - lo) + 1;
    if (range == 0) return int64_t(next_u64());
    uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + int64_t(x % range);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace grand
