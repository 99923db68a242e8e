#include "csqpe/parallel.hpp"

#include <cstdlib>
#include <string>

namespace csqpe {

std::size_t default_thread_count() {
  const char* env = std::getenv("CSQPE_THREADS");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const long value = std::stol(env, &used);
    if (used == std::string(env).size() && value > 0) return static_cast<std::size_t>(value);
  } catch (const std::exception&) {
  }
  return 1;
}

}  // namespace csqpe
