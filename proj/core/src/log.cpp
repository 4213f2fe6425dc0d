#include "rsvgd/log.hpp"

#include <atomic>
#include <cstdarg>
#include <cstdio>
#include <iostream>
#include <mutex>

namespace rsvgd {
namespace {

std::atomic<LogLevel> g_level{LogLevel::warning};
std::mutex g_mutex;

void default_sink(LogLevel level, const std::string& message) {
    static const char* names[] = {"debug", "info", "warning", "error"};
    std::cerr << "[rsvgd " << names[static_cast<int>(level)] << "] " << message << '\n';
}

LogSink& sink_ref() {
    static LogSink sink = default_sink;
    return sink;
}

}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void set_log_sink(LogSink sink) {
    std::lock_guard<std::mutex> lock(g_mutex);
    sink_ref() = sink ? std::move(sink) : LogSink(default_sink);
}

void log(LogLevel level, const std::string& message) {
    if (level < g_level.load() || level == LogLevel::silent) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    sink_ref()(level, message);
}

std::string strprintf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list copy;
    va_copy(copy, args);
    const int n = std::vsnprintf(nullptr, 0, fmt, copy);
    va_end(copy);
    std::string out;
    if (n > 0) {
        out.resize(static_cast<std::size_t>(n) + 1);
        std::vsnprintf(out.data(), out.size(), fmt, args);
        out.resize(static_cast<std::size_t>(n));
    }
    va_end(args);
    return out;
}

}  // namespace rsvgd
