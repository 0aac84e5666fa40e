#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace vispr {

// FNV-1a. Used instead of std::hash so derived values (confidence bands,
// deterministic choices) are identical across standard libraries and runs.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a_mix(std::uint64_t h, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xff;
    h *= 1099511628211ull;
  }
  return h;
}

// Top 53 bits -> [0, 1).
inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double band_from_hash(std::uint64_t h, double lo, double hi) {
  return lo + (hi - lo) * unit_from_bits(h);
}

// mt19937_64 with explicit range mapping.  std::uniform_int_distribution and
// friends are implementation-defined, which would break the byte-identical
// corpus contract across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  double unit() { return unit_from_bits(next()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Inclusive bounds; modulo mapping (bias is irrelevant here, determinism is
  // the requirement).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace vispr
