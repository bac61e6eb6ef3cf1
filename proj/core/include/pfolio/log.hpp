#ifndef PFOLIO_LOG_HPP
#define PFOLIO_LOG_HPP

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace pfolio {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Log threshold comes from the PF_LOG environment variable
// (error|warn|info|debug); default is warn.
inline LogLevel log_threshold() {
  static LogLevel level = [] {
    const char* env = std::getenv("PF_LOG");
    if (env == nullptr) return LogLevel::warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::error;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

inline void log_message(LogLevel level, const std::string& message) {
  if (level > log_threshold()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "pfolio [%s] %s\n", names[static_cast<int>(level)],
               message.c_str());
}

inline void log_warn(const std::string& m) { log_message(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }

}  // namespace pfolio

#endif
