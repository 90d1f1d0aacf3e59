#pragma once

// Deterministic pseudo-randomness for the subset experiments. Two published
// generators with documented identities: splitmix64 as the seeding/substream
// hash, xoshiro256++ (256-bit state) as the sampling generator. Bounded draws
// use Lemire's unbiased multiply-shift rejection, so every substream is exactly
// reproducible from (master_seed, substream index) alone.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "benchaudit/errors.hpp"

namespace benchaudit {

// Output mix of Sebastiano Vigna's splitmix64; bijective on 64-bit words.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// i-th output of the splitmix64 stream seeded with `state` (i counts from 0).
inline std::uint64_t splitmix64_at(std::uint64_t state, std::uint64_t i) {
  return splitmix64_mix(state + (i + 1) * 0x9E3779B97F4A7C15ULL);
}

// Substream seeds are splitmix64 outputs, so they depend only on the master
// seed and the substream index, never on execution order or thread count.
inline std::uint64_t substream_seed(std::uint64_t master_seed,
                                    std::uint64_t index) {
  return splitmix64_at(master_seed, index);
}

// xoshiro256++ of Blackman and Vigna; state seeded by four splitmix64 outputs
// as its authors recommend.
class Xoshiro256pp {
public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    for (auto &word : state_) {
      seed += 0x9E3779B97F4A7C15ULL;
      word = splitmix64_mix(seed);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Unbiased draw from {0, ..., bound-1} (Lemire 2019).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0)
      throw ValidationError(ValidationKind::OutOfRange,
                            "bounded draw needs a positive bound");
    unsigned __int128 m =
        static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) *
            static_cast<unsigned __int128>(bound);
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

// Uniform simple random subset of {0..pool-1} of the given size, via partial
// Fisher-Yates; returned ascending so later reductions are order-stable.
inline std::vector<std::size_t> sample_subset(Xoshiro256pp &rng,
                                              std::size_t pool,
                                              std::size_t size) {
  if (size == 0 || size > pool)
    throw ValidationError(ValidationKind::OutOfRange,
                          "subset size must lie in [1, pool]");
  std::vector<std::size_t> indices(pool);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(size);
  std::sort(indices.begin(), indices.end());
  return indices;
}

} // namespace benchaudit
