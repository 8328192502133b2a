#pragma once

#include <string>

namespace stldec {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

void set_log_level(LogLevel level);
LogLevel log_level();

/// Reads STLDEC_LOG={error,info,debug} if set; unknown values are ignored.
void init_log_level_from_env();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace stldec
