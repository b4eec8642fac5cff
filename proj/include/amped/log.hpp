// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace amped {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kOff = 3 };

/// Minimum level currently enabled, taken from the AMPED_LOG environment
/// variable (debug|info|warn) on first use. Defaults to warn.
LogLevel log_level();

void log_message(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& msg) { log_message(LogLevel::kDebug, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::kInfo, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::kWarn, msg); }

}  // namespace amped
