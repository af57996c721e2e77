#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csforge {

// SplitMix64 generator. Used everywhere instead of std::mt19937 +
// std::*_distribution because the standard distributions are
// implementation-defined; this keeps every seeded run bit-identical
// across compilers and platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t next_below(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Standard normal via Box-Muller.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices sampled from [0, n), in sorted order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
  std::uint64_t state_;
};

// FNV-1a over a byte string; stable basis for keyed substreams.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
  // One SplitMix64 scramble of a xor rotated b.
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-sentence stream key: (seed, sentence id, variant index). Keying the
// stream this way means corpus-level iteration order and parallelism
// cannot change any sentence's output.
inline Rng keyed_rng(std::uint64_t seed, std::string_view id,
                     std::uint64_t variant) {
  return Rng(mix_u64(mix_u64(seed, fnv1a(id)), variant));
}

inline std::vector<std::size_t> Rng::sample_indices(std::size_t n,
                                                    std::size_t k) {
  if (k >= n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  // Floyd's algorithm, then sort for a stable output order.
  std::vector<std::size_t> out;
  std::vector<bool> chosen(n, false);
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::size_t t = next_below(j + 1);
    if (chosen[t]) t = j;
    chosen[t] = true;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace csforge
