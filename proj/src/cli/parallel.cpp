#include "perimeter_phase/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "perimeter_phase/errors.hpp"

namespace perimeter_phase {

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PERIMETER_PHASE_THREADS"); env && *env) {
    const std::string_view s(env);
    std::size_t cap = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec != std::errc() || end != s.data() + s.size() || cap == 0) {
      fail(ErrorCode::config, "PERIMETER_PHASE_THREADS must be a positive integer, got '" + std::string(s) + "'");
    }
    n = std::min(n, cap);
  }
  return n;
}

}  // namespace perimeter_phase
