#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>

namespace tda {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from TDA_LOG_LEVEL (error|info|debug), default info.
LogLevel log_level();

// One structured line to stderr: ISO timestamp, level, event, then key=value
// pairs. job_id 0 is omitted.
void log_line(LogLevel level, const std::string& event, std::uint64_t job_id = 0,
              std::initializer_list<std::pair<const char*, std::string>> fields = {});

inline void log_info(const std::string& event, std::uint64_t job_id = 0,
                     std::initializer_list<std::pair<const char*, std::string>> fields = {}) {
  log_line(LogLevel::Info, event, job_id, fields);
}

inline void log_error(const std::string& event, std::uint64_t job_id = 0,
                      std::initializer_list<std::pair<const char*, std::string>> fields = {}) {
  log_line(LogLevel::Error, event, job_id, fields);
}

inline void log_debug(const std::string& event, std::uint64_t job_id = 0,
                      std::initializer_list<std::pair<const char*, std::string>> fields = {}) {
  log_line(LogLevel::Debug, event, job_id, fields);
}

}  // namespace tda
