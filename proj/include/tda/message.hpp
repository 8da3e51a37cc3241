#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tda/endpoint.hpp"
#include "tda/matrix.hpp"
#include "tda/scheduler.hpp"

namespace tda {

// Wire kind tags are normative; see docs/protocol.md.
enum class MsgKind : std::uint8_t {
  Register = 1,
  RegisterAck = 2,
  Heartbeat = 3,
  JobRequest = 4,
  SubRequest = 5,
  BroadcastOperand = 6,
  PartialResult = 7,
  JobAccepted = 8,
  ErrorReport = 9,
  StatusRequest = 10,
  StatusReply = 11,
};

const char* to_string(MsgKind k);

struct RegisterBody {
  Endpoint listen;
  std::vector<std::string> services;
  bool operator==(const RegisterBody&) const = default;
};

struct RegisterAckBody {
  bool operator==(const RegisterAckBody&) const = default;
};

struct HeartbeatBody {
  double raw_speed = 0.0;
  double load_factor = 0.0;
  bool operator==(const HeartbeatBody&) const = default;
};

// Client -> coordinator. Carries the full first operand; the coordinator
// granulates it into row blocks. The second operand never passes through
// the coordinator.
struct JobRequestBody {
  Policy policy = Policy::Homogenized;
  std::string workload_kind;
  Endpoint reply_to;        // where providers deliver partial results
  std::uint32_t operand_cols = 0;  // second operand's column count
  Matrix first;
  bool operator==(const JobRequestBody&) const = default;
};

// Coordinator -> provider. The client endpoint closes the triangle: the
// provider answers the client directly, not the coordinator.
struct SubRequestBody {
  std::string workload_kind;
  Endpoint client;
  std::uint64_t total_rows = 0;
  RowRange range;
  Matrix block;
  bool operator==(const SubRequestBody&) const = default;
};

// Client -> provider, the full second operand.
struct BroadcastOperandBody {
  Matrix operand;
  bool operator==(const BroadcastOperandBody&) const = default;
};

// Provider -> client. compute_seconds is the provider-measured pure compute
// duration, which the client uses to separate computation from overhead.
struct PartialResultBody {
  RowRange range;
  double compute_seconds = 0.0;
  Matrix block;
  bool operator==(const PartialResultBody&) const = default;
};

struct JobShare {
  std::string provider_id;
  Endpoint endpoint;
  RowRange range;
  bool operator==(const JobShare&) const = default;
};

// Coordinator -> client: the participating providers (allotment > 0 only),
// the summed performance behind the plan, and a rough finish prediction the
// client bases its deadline on.
struct JobAcceptedBody {
  Policy policy = Policy::Homogenized;
  double p_total = 0.0;
  double predicted_finish_s = 0.0;
  std::vector<JobShare> shares;
  bool operator==(const JobAcceptedBody&) const = default;
};

struct ErrorBody {
  std::string code;
  std::string detail;
  bool operator==(const ErrorBody&) const = default;
};

struct StatusRequestBody {
  bool operator==(const StatusRequestBody&) const = default;
};

struct ProviderStatus {
  std::string id;
  Endpoint endpoint;
  double performance = 0.0;     // homogenized, work-units/s
  double last_seen_age_s = 0.0; // seconds since newest heartbeat; inf if none
  double rtt_ms = 0.0;          // dispatch connect time; NaN until measured
  std::vector<std::string> services;
  bool operator==(const ProviderStatus&) const = default;
};

struct StatusReplyBody {
  std::vector<ProviderStatus> providers;
  bool operator==(const StatusReplyBody&) const = default;
};

using MessageBody =
    std::variant<RegisterBody, RegisterAckBody, HeartbeatBody, JobRequestBody, SubRequestBody,
                 BroadcastOperandBody, PartialResultBody, JobAcceptedBody, ErrorBody,
                 StatusRequestBody, StatusReplyBody>;

// job_id 0 is reserved for messages not tied to a job (REGISTER, HEARTBEAT,
// STATUS_*). The body alternative must match `kind`.
struct Message {
  MsgKind kind = MsgKind::Heartbeat;
  std::uint64_t job_id = 0;
  std::string sender_id;
  MessageBody body;

  bool operator==(const Message&) const = default;
};

Message make_error(std::uint64_t job_id, std::string sender, Errc code, std::string detail);

}  // namespace tda
