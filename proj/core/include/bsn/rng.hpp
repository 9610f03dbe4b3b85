#pragma once

#include <cstdint>
#include <string_view>

namespace bsn {

// Counter-based random numbers: every draw is a pure function of
// (seed, stream name, indices). Draws are independent of evaluation
// order, which keeps mobility noise and traffic destinations stable
// when unrelated parts of a run change.
class SubstreamRng {
 public:
  explicit SubstreamRng(uint64_t seed) : seed_(seed) {}

  uint64_t draw(std::string_view stream, uint64_t a, uint64_t b = 0) const {
    uint64_t h = mix(seed_ ^ fnv1a(stream));
    h = mix(h ^ a);
    h = mix(h ^ b);
    return h;
  }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform(std::string_view stream, uint64_t n, uint64_t a,
                   uint64_t b = 0) const {
    return draw(stream, a, b) % n;
  }

  double uniform_real(std::string_view stream, uint64_t a,
                      uint64_t b = 0) const {
    return static_cast<double>(draw(stream, a, b) >> 11) * 0x1.0p-53;
  }

  uint64_t seed() const { return seed_; }

  static uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  // splitmix64 finalizer
  static uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t seed_;
};

}  // namespace bsn
