#include "tailcp/random.hpp"

#include <cstdlib>
#include <string>
#include <thread>

#include "tailcp/normal.hpp"
#include "tailcp/parallel.hpp"

namespace tailcp {

double UniformStream::next_normal() noexcept { return normal_quantile(next_uniform()); }

unsigned default_workers() {
  if (const char* env = std::getenv("TAILCP_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace tailcp
