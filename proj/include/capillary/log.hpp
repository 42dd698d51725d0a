#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace capillary::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

inline Level& level() {
  static Level lv = [] {
    const char* env = std::getenv("CAP_LOG");
    std::string s = env ? env : "quiet";
    if (s == "debug") return Level::Debug;
    if (s == "info") return Level::Info;
    return Level::Quiet;
  }();
  return lv;
}

inline void info(const std::string& msg) {
  if (level() >= Level::Info) std::cerr << "[info] " << msg << '\n';
}

inline void debug(const std::string& msg) {
  if (level() >= Level::Debug) std::cerr << "[debug] " << msg << '\n';
}

}  // namespace capillary::log
