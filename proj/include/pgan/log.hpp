#pragma once

#include <string>

namespace pgan {

enum class LogLevel { Error, Warn, Info, Debug };

/// Reads PGAN_LOG_LEVEL (error|warn|info|debug, default info). Unknown
/// values fall back to info with a warning.
void init_logging();
void set_log_level(LogLevel level);
LogLevel parse_log_level(const std::string& name);

void log_error(const std::string& message);
void log_warn(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace pgan
