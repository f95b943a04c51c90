#include "rvp/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace rvp {

static LogLevel parse_level() {
  const char* env = std::getenv("RVP_LOG");
  if (!env) return LogLevel::Warn;
  if (std::strcmp(env, "silent") == 0) return LogLevel::Silent;
  if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
  if (std::strcmp(env, "info") == 0) return LogLevel::Info;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Warn;
}

LogLevel log_level() {
  static LogLevel level = parse_level();
  return level;
}

static void vlog(const char* tag, const char* fmt, va_list ap) {
  std::fprintf(stderr, "[rvp %s] ", tag);
  std::vfprintf(stderr, fmt, ap);
  std::fputc('\n', stderr);
}

void log_warn(const char* fmt, ...) {
  if (log_level() < LogLevel::Warn) return;
  va_list ap;
  va_start(ap, fmt);
  vlog("warn", fmt, ap);
  va_end(ap);
}

void log_info(const char* fmt, ...) {
  if (log_level() < LogLevel::Info) return;
  va_list ap;
  va_start(ap, fmt);
  vlog("info", fmt, ap);
  va_end(ap);
}

void log_debug(const char* fmt, ...) {
  if (log_level() < LogLevel::Debug) return;
  va_list ap;
  va_start(ap, fmt);
  vlog("debug", fmt, ap);
  va_end(ap);
}

}  // namespace rvp
