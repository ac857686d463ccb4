#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace nerbreaker {

// The standard distributions are implementation-defined, so sampling is done
// by hand on top of mt19937_64 (whose output sequence is fully specified).
using Rng = std::mt19937_64;

std::uint64_t fnv1a64(std::string_view bytes);

/// Combines a run seed with per-item keys into an independent stream seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Uniform integer in [0, n). n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Fisher-Yates over the whole range.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// First k items of a partial Fisher-Yates shuffle: a uniform sample without
/// replacement, in draw order.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> items, std::size_t k, Rng& rng) {
  if (k > items.size()) k = items.size();
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, items.size() - i));
    using std::swap;
    swap(items[i], items[j]);
  }
  items.resize(k);
  return items;
}

}  // namespace nerbreaker
