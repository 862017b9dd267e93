#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace bourne {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; mixes a list of integers into one seed so that
// independent streams can be derived from (seed, purpose, epoch, node, ...).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

inline Rng make_rng(std::initializer_list<std::uint64_t> parts) { return Rng(mix_seed(parts)); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// k distinct draws from [0, n), in draw order (partial Fisher-Yates over a
// sparse swap map, O(k) memory).
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

template <class T>
void shuffle(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

// Stream purposes for mix_seed.
enum class Stream : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kView = 3,
  kInference = 4,
  kInjection = 5,
  kSynthetic = 6,
  kSweep = 7,
};

inline std::uint64_t stream(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace bourne
