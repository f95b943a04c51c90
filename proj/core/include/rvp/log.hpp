#pragma once

namespace rvp {

enum class LogLevel : int { Silent = 0, Warn = 1, Info = 2, Debug = 3 };

// Current verbosity, taken from the RVP_LOG environment variable on first use
// (silent|warn|info|debug, default warn). All output goes to stderr.
LogLevel log_level();

void log_warn(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void log_info(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void log_debug(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

}  // namespace rvp
