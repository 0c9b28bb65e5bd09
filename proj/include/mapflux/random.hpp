#pragma once

#include <cstdint>
#include <random>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace mapflux {

using Rng = std::mt19937_64;

/// Per-path generator derived from (master_seed, path_index).
///
/// The engine is seeded through std::seed_seq with the five words
/// {lo32(seed), hi32(seed), lo32(index), hi32(index), 0x6d617066}. The stream
/// depends on nothing else, so results do not change with the worker count.
Rng seed_stream(std::uint64_t master_seed, std::uint64_t path_index);

// Boost distributions are used instead of <random> ones so the variates are
// identical across standard-library implementations.

inline double standard_normal(Rng& rng) {
  return boost::random::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform01(Rng& rng) { return boost::random::uniform_01<double>()(rng); }

inline double exponential(Rng& rng, double rate) {
  return boost::random::exponential_distribution<double>(rate)(rng);
}

}  // namespace mapflux
