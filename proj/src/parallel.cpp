#include "mapflux/parallel.hpp"

#include <cstdlib>
#include <string>

namespace mapflux {

std::size_t worker_count() {
  if (const char* env = std::getenv("MAPFLUX_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace mapflux
