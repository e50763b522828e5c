#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

// Deterministic, platform-independent randomness. std::mt19937_64 has a
// fully specified sequence; the distribution helpers below avoid
// std::*_distribution, whose output is implementation-defined.
namespace festa::rng {

constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

inline uint64_t hash_str(std::string_view s, uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t mix(uint64_t a, uint64_t b) {
  // splitmix64 finalizer over the combined words
  uint64_t z = a + 0x9e3779b97f4a7c15ull + b;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Stream {
 public:
  explicit Stream(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [lo, hi], inclusive. Modulo bias is irrelevant at the
  // ranges used here; determinism is what matters.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
  }

  // Box-Muller; consumes exactly two draws per call.
  double gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

inline uint64_t seed_part(uint64_t v) { return v; }
inline uint64_t seed_part(std::string_view s) { return hash_str(s); }
inline uint64_t seed_part(const char* s) { return hash_str(s); }
inline uint64_t seed_part(int v) { return static_cast<uint64_t>(v); }

// Derives a child seed from a root seed and a tuple of tags. Every sampling
// site in the pipeline names its own tag path, so call order never matters.
template <typename... Parts>
uint64_t derive(uint64_t seed, Parts&&... parts) {
  uint64_t h = mix(seed, 0);
  ((h = mix(h, seed_part(parts))), ...);
  return h;
}

}  // namespace festa::rng
