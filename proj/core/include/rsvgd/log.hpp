#pragma once

#include <functional>
#include <string>

namespace rsvgd {

enum class LogLevel { debug = 0, info = 1, warning = 2, error = 3, silent = 4 };

using LogSink = std::function<void(LogLevel, const std::string&)>;

// Process-wide logging hook. The default sink writes warnings and errors to stderr.
void set_log_level(LogLevel level);
LogLevel log_level();
void set_log_sink(LogSink sink);
void log(LogLevel level, const std::string& message);

inline void log_debug(const std::string& m) { log(LogLevel::debug, m); }
inline void log_info(const std::string& m) { log(LogLevel::info, m); }
inline void log_warning(const std::string& m) { log(LogLevel::warning, m); }

// printf-style formatting into std::string.
std::string strprintf(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

}  // namespace rsvgd
