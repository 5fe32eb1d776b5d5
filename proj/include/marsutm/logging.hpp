#ifndef MARSUTM_LOGGING_HPP
#define MARSUTM_LOGGING_HPP

#include <spdlog/spdlog.h>

namespace marsutm::log {

inline constexpr const char* kLevelVariable = "MARSUTM_LOG";

/// Reads MARSUTM_LOG (quiet | info | debug) and sets the global level.
/// Unset or unknown values fall back to `fallback`.
void init_from_env(const char* fallback = "quiet");

using spdlog::debug;
using spdlog::info;
using spdlog::trace;
using spdlog::warn;

} // namespace marsutm::log

#endif
