#include "marsutm/logging.hpp"

#include <cstdlib>
#include <string_view>

namespace marsutm::log {

namespace {

bool apply(std::string_view name) {
  if (name == "quiet") {
    spdlog::set_level(spdlog::level::warn);
  } else if (name == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (name == "debug") {
    // debug also enables the per-Newton-iteration traces
    spdlog::set_level(spdlog::level::trace);
  } else {
    return false;
  }
  return true;
}

} // namespace

void init_from_env(const char* fallback) {
  spdlog::set_pattern("[%l] %v");
  const char* value = std::getenv(kLevelVariable);
  if (value == nullptr || !apply(value)) apply(fallback);
}

} // namespace marsutm::log
