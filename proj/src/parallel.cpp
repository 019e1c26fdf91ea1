#include "gcr/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace gcr {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GCR_WORKERS")) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
    if (ec == std::errc() && *ptr == '\0' && value > 0) return value;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace gcr
