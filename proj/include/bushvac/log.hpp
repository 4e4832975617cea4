#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace bushvac::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Log level comes from the BUSHVAC_LOG environment variable only.
inline Level threshold() {
  static Level lvl = [] {
    const char* env = std::getenv("BUSHVAC_LOG");
    if (env == nullptr) return Level::warn;
    std::string s(env);
    if (s == "error") return Level::error;
    if (s == "warn") return Level::warn;
    if (s == "info") return Level::info;
    if (s == "debug") return Level::debug;
    return Level::warn;
  }();
  return lvl;
}

inline void emit(Level lvl, const char* tag, const std::string& msg) {
  if (lvl > threshold()) return;
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

inline void error(const std::string& msg) { emit(Level::error, "error", msg); }
inline void warn(const std::string& msg) { emit(Level::warn, "warn", msg); }
inline void info(const std::string& msg) { emit(Level::info, "info", msg); }
inline void debug(const std::string& msg) { emit(Level::debug, "debug", msg); }

}  // namespace bushvac::log
