// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#include "amped/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace amped {

static LogLevel parse_level() {
  const char* env = std::getenv("AMPED_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
  if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
  if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
  return LogLevel::kWarn;
}

LogLevel log_level() {
  static LogLevel level = parse_level();
  return level;
}

void log_message(LogLevel level, const std::string& msg) {
  if (level < log_level()) return;
  const char* tag = "info";
  switch (level) {
    case LogLevel::kDebug: tag = "debug"; break;
    case LogLevel::kInfo: tag = "info"; break;
    case LogLevel::kWarn: tag = "warn"; break;
    case LogLevel::kOff: return;
  }
  std::fprintf(stderr, "[amped][%s] %s\n", tag, msg.c_str());
}

}  // namespace amped
