#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dictmt {

// Seeded generator with a fixed cross-platform sequence. std::shuffle and
// std::uniform_int_distribution are implementation-defined, so shuffling and
// bounded draws are spelled out here; mt19937_64 itself is fully specified
// by the standard.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Unbiased draw in [0, bound) via rejection sampling.
  std::uint64_t bounded(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent stream for a pipeline stage, so inserting draws in one stage
  // does not shift the sequence seen by another.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stage_tag) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stage_tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace dictmt
