#include "tda/log.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <mutex>

namespace tda {
namespace {

LogLevel detect_level() {
  const char* env = std::getenv("TDA_LOG_LEVEL");
  if (env == nullptr) return LogLevel::Info;
  if (std::strcmp(env, "error") == 0) return LogLevel::Error;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Info;
}

std::mutex log_mu;

}  // namespace

LogLevel log_level() {
  static LogLevel level = detect_level();
  return level;
}

void log_line(LogLevel level, const std::string& event, std::uint64_t job_id,
              std::initializer_list<std::pair<const char*, std::string>> fields) {
  if (level > log_level()) return;

  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() %
            1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char stamp[40];
  std::snprintf(stamp, sizeof(stamp), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms));

  const char* level_name =
      level == LogLevel::Error ? "error" : (level == LogLevel::Info ? "info" : "debug");

  std::string line = std::string(stamp) + " level=" + level_name + " event=" + event;
  if (job_id != 0) line += " job_id=" + std::to_string(job_id);
  for (const auto& [k, v] : fields) line += std::string(" ") + k + "=" + v;
  line += "\n";

  std::lock_guard lock(log_mu);
  std::fputs(line.c_str(), stderr);
}

}  // namespace tda
