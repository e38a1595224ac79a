#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ranmt {

// 64-bit mix from splitmix64. Used as a counter-based generator: the whole
// stream is a pure function of (seed, stream name, counter), which makes
// iterator state trivially serializable and runs bitwise reproducible.
constexpr uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

class Rng {
 public:
  Rng() : Rng(0, {}) {}
  explicit Rng(uint64_t seed, std::string_view stream = {})
      : base_(mix64(seed ^ fnv1a(stream)) ^ 0x6a09e667f3bcc908ull) {}

  uint64_t next_u64() { return mix64(base_ + counter_++ * 0x9e3779b97f4a7c15ull); }

  // [0, 1) with 53 random bits
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // [0, n); n > 0. Lemire's multiply-shift; slight bias is irrelevant here.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Box-Muller, one draw per call (the spare is discarded so the state
  // advance per call is fixed).
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  uint64_t counter() const { return counter_; }
  void set_counter(uint64_t c) { counter_ = c; }

 private:
  uint64_t base_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace ranmt
