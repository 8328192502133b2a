#include "log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace stldec {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::Error)};

void emit(const char* tag, const std::string& msg) {
  std::fprintf(stderr, "[stldec %s] %s\n", tag, msg.c_str());
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void init_log_level_from_env() {
  const char* v = std::getenv("STLDEC_LOG");
  if (!v) return;
  if (std::strcmp(v, "error") == 0) set_log_level(LogLevel::Error);
  else if (std::strcmp(v, "info") == 0) set_log_level(LogLevel::Info);
  else if (std::strcmp(v, "debug") == 0) set_log_level(LogLevel::Debug);
}

void log_error(const std::string& msg) { emit("error", msg); }

void log_info(const std::string& msg) {
  if (g_level.load() >= static_cast<int>(LogLevel::Info)) emit("info", msg);
}

void log_debug(const std::string& msg) {
  if (g_level.load() >= static_cast<int>(LogLevel::Debug)) emit("debug", msg);
}

}  // namespace stldec
