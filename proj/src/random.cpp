#include "mapflux/random.hpp"

namespace mapflux {

Rng seed_stream(std::uint64_t master_seed, std::uint64_t path_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(path_index & 0xffffffffu),
                    static_cast<std::uint32_t>(path_index >> 32), 0x6d617066u};
  return Rng(seq);
}

}  // namespace mapflux
