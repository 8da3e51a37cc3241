#pragma once

#include <stdexcept>
#include <string>

namespace tda {

// Domain error codes. The CLI prints them as `error: <code>: <detail>` and
// they cross the wire verbatim in ERROR message bodies.
enum class Errc {
  empty_provider_set,
  degenerate_performance,
  invalid_load,
  invalid_argument,
  no_samples,
  plan_mismatch,
  frame_too_large,
  decode_error,
  unknown_kind,
  channel_closed,
  io_error,
  unknown_provider,
  no_providers,
  job_failed,
  registration_rejected,
  dimension_mismatch,
  assembly_timeout,
  duplicate_range,
  incomplete,
  empty_input,
  operand_timeout,
  invalid_config,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
  Error(Errc code, std::string detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  Errc code() const { return code_; }
  const std::string& detail() const { return detail_; }

private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] inline void fail(Errc code, std::string detail) {
  throw Error(code, std::move(detail));
}

}  // namespace tda
