#include "pgan/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <stdexcept>

namespace pgan {

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static auto instance = [] {
    auto l = spdlog::stderr_color_mt("pgan");
    l->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    l->set_level(spdlog::level::info);
    return l;
  }();
  return instance;
}

}  // namespace

LogLevel parse_log_level(const std::string& name) {
  if (name == "error") return LogLevel::Error;
  if (name == "warn") return LogLevel::Warn;
  if (name == "info") return LogLevel::Info;
  if (name == "debug") return LogLevel::Debug;
  throw std::invalid_argument("log level must be error|warn|info|debug, got '" + name + "'");
}

void set_log_level(LogLevel level) {
  static constexpr spdlog::level::level_enum map[] = {spdlog::level::err, spdlog::level::warn,
                                                      spdlog::level::info, spdlog::level::debug};
  logger()->set_level(map[static_cast<int>(level)]);
}

void init_logging() {
  const char* env = std::getenv("PGAN_LOG_LEVEL");
  if (!env || !*env) return set_log_level(LogLevel::Info);
  try {
    set_log_level(parse_log_level(env));
  } catch (const std::invalid_argument& e) {
    set_log_level(LogLevel::Info);
    log_warn(std::string("PGAN_LOG_LEVEL: ") + e.what());
  }
}

void log_error(const std::string& message) { logger()->error(message); }
void log_warn(const std::string& message) { logger()->warn(message); }
void log_info(const std::string& message) { logger()->info(message); }
void log_debug(const std::string& message) { logger()->debug(message); }

}  // namespace pgan
