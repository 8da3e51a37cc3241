#include "tda/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace tda {
namespace {

constexpr std::size_t kMaxPayload = 0x7FFFFFFF;  // 2^31 - 1

const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Register: return "REGISTER";
    case MsgKind::RegisterAck: return "REGISTER_ACK";
    case MsgKind::Heartbeat: return "HEARTBEAT";
    case MsgKind::JobRequest: return "JOB_REQUEST";
    case MsgKind::SubRequest: return "SUB_REQUEST";
    case MsgKind::BroadcastOperand: return "BROADCAST_OPERAND";
    case MsgKind::PartialResult: return "PARTIAL_RESULT";
    case MsgKind::JobAccepted: return "JOB_ACCEPTED";
    case MsgKind::ErrorReport: return "ERROR";
    case MsgKind::StatusRequest: return "STATUS_REQUEST";
    case MsgKind::StatusReply: return "STATUS_REPLY";
  }
  return "?";
}

class Writer {
public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str16(const std::string& s) {
    if (s.size() > 0xFFFF) fail(Errc::frame_too_large, "string exceeds 65535 bytes");
    u16(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void strings(const std::vector<std::string>& v) {
    if (v.size() > 0xFFFF) fail(Errc::frame_too_large, "too many strings");
    u16(static_cast<std::uint16_t>(v.size()));
    for (const auto& s : v) str16(s);
  }
  void endpoint(const Endpoint& ep) {
    str16(ep.host);
    u16(ep.port);
  }
  void matrix(const Matrix& m) {
    u32(m.rows);
    u32(m.cols);
    for (double x : m.data) f64(x);
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  std::vector<std::uint8_t> out_;
};

class Reader {
public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = (std::uint16_t(data_[pos_]) << 8) | data_[pos_ + 1];
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str16() {
    std::size_t n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<std::string> strings() {
    std::size_t n = u16();
    std::vector<std::string> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(str16());
    return v;
  }
  Endpoint endpoint() {
    Endpoint ep;
    ep.host = str16();
    ep.port = u16();
    return ep;
  }
  Matrix matrix() {
    std::uint32_t rows = u32();
    std::uint32_t cols = u32();
    std::uint64_t count = std::uint64_t(rows) * cols;
    if (count > (size_ - pos_) / 8) fail(Errc::decode_error, "frame truncated");
    Matrix m(rows, cols);
    for (auto& x : m.data) {
      x = f64();
      if (!std::isfinite(x)) fail(Errc::decode_error, "matrix entry is not finite");
    }
    return m;
  }

  void finish() const {
    if (pos_ != size_) fail(Errc::decode_error, "frame length does not match its contents");
  }

private:
  void need(std::uint64_t n) const {
    if (n > size_ - pos_) fail(Errc::decode_error, "frame truncated");
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

Policy read_policy(Reader& r) {
  std::uint8_t v = r.u8();
  if (v > 1) fail(Errc::decode_error, "bad policy byte");
  return static_cast<Policy>(v);
}

std::size_t matrix_wire_size(const Matrix& m) {
  return 8 + std::size_t(m.rows) * m.cols * 8;
}

std::size_t body_wire_size(const Message& m) {
  switch (m.kind) {
    case MsgKind::Register: {
      const auto& b = std::get<RegisterBody>(m.body);
      std::size_t n = 2 + b.listen.host.size() + 2 + 2;
      for (const auto& s : b.services) n += 2 + s.size();
      return n;
    }
    case MsgKind::RegisterAck: return 0;
    case MsgKind::Heartbeat: return 16;
    case MsgKind::JobRequest: {
      const auto& b = std::get<JobRequestBody>(m.body);
      return 1 + 2 + b.workload_kind.size() + 2 + b.reply_to.host.size() + 2 + 4 +
             matrix_wire_size(b.first);
    }
    case MsgKind::SubRequest: {
      const auto& b = std::get<SubRequestBody>(m.body);
      return 2 + b.workload_kind.size() + 2 + b.client.host.size() + 2 + 8 + 16 +
             matrix_wire_size(b.block);
    }
    case MsgKind::BroadcastOperand:
      return matrix_wire_size(std::get<BroadcastOperandBody>(m.body).operand);
    case MsgKind::PartialResult:
      return 16 + 8 + matrix_wire_size(std::get<PartialResultBody>(m.body).block);
    case MsgKind::JobAccepted: {
      const auto& b = std::get<JobAcceptedBody>(m.body);
      std::size_t n = 1 + 8 + 8 + 2;
      for (const auto& s : b.shares) n += 2 + s.provider_id.size() + 2 + s.endpoint.host.size() + 2 + 16;
      return n;
    }
    case MsgKind::ErrorReport: {
      const auto& b = std::get<ErrorBody>(m.body);
      return 2 + b.code.size() + 2 + b.detail.size();
    }
    case MsgKind::StatusRequest: return 0;
    case MsgKind::StatusReply: {
      const auto& b = std::get<StatusReplyBody>(m.body);
      std::size_t n = 2;
      for (const auto& p : b.providers) {
        n += 2 + p.id.size() + 2 + p.endpoint.host.size() + 2 + 24 + 2;
        for (const auto& s : p.services) n += 2 + s.size();
      }
      return n;
    }
  }
  fail(Errc::unknown_kind, "unencodable kind");
}

}  // namespace

const char* to_string(MsgKind k) { return kind_name(k); }

Message make_error(std::uint64_t job_id, std::string sender, Errc code, std::string detail) {
  Message m;
  m.kind = MsgKind::ErrorReport;
  m.job_id = job_id;
  m.sender_id = std::move(sender);
  m.body = ErrorBody{errc_name(code), std::move(detail)};
  return m;
}

std::vector<std::uint8_t> encode(const Message& m) {
  // Size the payload up front so oversized matrices are rejected before any
  // serialization work happens.
  std::size_t payload = 1 + 8 + 2 + m.sender_id.size() + body_wire_size(m);
  if (payload > kMaxPayload)
    fail(Errc::frame_too_large,
         "payload of " + std::to_string(payload) + " bytes exceeds 2^31 - 1");

  Writer w;
  w.u32(static_cast<std::uint32_t>(payload));
  w.u8(static_cast<std::uint8_t>(m.kind));
  w.u64(m.job_id);
  w.str16(m.sender_id);

  switch (m.kind) {
    case MsgKind::Register: {
      const auto& b = std::get<RegisterBody>(m.body);
      w.endpoint(b.listen);
      w.strings(b.services);
      break;
    }
    case MsgKind::RegisterAck:
      break;
    case MsgKind::Heartbeat: {
      const auto& b = std::get<HeartbeatBody>(m.body);
      w.f64(b.raw_speed);
      w.f64(b.load_factor);
      break;
    }
    case MsgKind::JobRequest: {
      const auto& b = std::get<JobRequestBody>(m.body);
      w.u8(static_cast<std::uint8_t>(b.policy));
      w.str16(b.workload_kind);
      w.endpoint(b.reply_to);
      w.u32(b.operand_cols);
      w.matrix(b.first);
      break;
    }
    case MsgKind::SubRequest: {
      const auto& b = std::get<SubRequestBody>(m.body);
      w.str16(b.workload_kind);
      w.endpoint(b.client);
      w.u64(b.total_rows);
      w.u64(b.range.begin);
      w.u64(b.range.end);
      w.matrix(b.block);
      break;
    }
    case MsgKind::BroadcastOperand:
      w.matrix(std::get<BroadcastOperandBody>(m.body).operand);
      break;
    case MsgKind::PartialResult: {
      const auto& b = std::get<PartialResultBody>(m.body);
      w.u64(b.range.begin);
      w.u64(b.range.end);
      w.f64(b.compute_seconds);
      w.matrix(b.block);
      break;
    }
    case MsgKind::JobAccepted: {
      const auto& b = std::get<JobAcceptedBody>(m.body);
      w.u8(static_cast<std::uint8_t>(b.policy));
      w.f64(b.p_total);
      w.f64(b.predicted_finish_s);
      if (b.shares.size() > 0xFFFF) fail(Errc::frame_too_large, "too many shares");
      w.u16(static_cast<std::uint16_t>(b.shares.size()));
      for (const auto& s : b.shares) {
        w.str16(s.provider_id);
        w.endpoint(s.endpoint);
        w.u64(s.range.begin);
        w.u64(s.range.end);
      }
      break;
    }
    case MsgKind::ErrorReport: {
      const auto& b = std::get<ErrorBody>(m.body);
      w.str16(b.code);
      w.str16(b.detail);
      break;
    }
    case MsgKind::StatusRequest:
      break;
    case MsgKind::StatusReply: {
      const auto& b = std::get<StatusReplyBody>(m.body);
      if (b.providers.size() > 0xFFFF) fail(Errc::frame_too_large, "too many providers");
      w.u16(static_cast<std::uint16_t>(b.providers.size()));
      for (const auto& p : b.providers) {
        w.str16(p.id);
        w.endpoint(p.endpoint);
        w.f64(p.performance);
        w.f64(p.last_seen_age_s);
        w.f64(p.rtt_ms);
        w.strings(p.services);
      }
      break;
    }
  }
  return w.take();
}

Message decode(const std::uint8_t* frame, std::size_t size) {
  if (size < 4) fail(Errc::decode_error, "frame shorter than its length prefix");
  std::uint32_t declared = 0;
  for (int i = 0; i < 4; ++i) declared = (declared << 8) | frame[i];
  if (declared > kMaxPayload) fail(Errc::decode_error, "declared payload exceeds 2^31 - 1");
  if (std::size_t(declared) + 4 != size)
    fail(Errc::decode_error, "frame length does not match its contents");

  Reader r(frame + 4, declared);
  std::uint8_t tag = r.u8();
  if (tag < 1 || tag > 11)
    fail(Errc::unknown_kind, "unknown kind tag " + std::to_string(tag));

  Message m;
  m.kind = static_cast<MsgKind>(tag);
  m.job_id = r.u64();
  m.sender_id = r.str16();

  switch (m.kind) {
    case MsgKind::Register: {
      RegisterBody b;
      b.listen = r.endpoint();
      b.services = r.strings();
      m.body = std::move(b);
      break;
    }
    case MsgKind::RegisterAck:
      m.body = RegisterAckBody{};
      break;
    case MsgKind::Heartbeat: {
      HeartbeatBody b;
      b.raw_speed = r.f64();
      b.load_factor = r.f64();
      m.body = b;
      break;
    }
    case MsgKind::JobRequest: {
      JobRequestBody b;
      b.policy = read_policy(r);
      b.workload_kind = r.str16();
      b.reply_to = r.endpoint();
      b.operand_cols = r.u32();
      b.first = r.matrix();
      m.body = std::move(b);
      break;
    }
    case MsgKind::SubRequest: {
      SubRequestBody b;
      b.workload_kind = r.str16();
      b.client = r.endpoint();
      b.total_rows = r.u64();
      b.range.begin = r.u64();
      b.range.end = r.u64();
      b.block = r.matrix();
      m.body = std::move(b);
      break;
    }
    case MsgKind::BroadcastOperand: {
      BroadcastOperandBody b;
      b.operand = r.matrix();
      m.body = std::move(b);
      break;
    }
    case MsgKind::PartialResult: {
      PartialResultBody b;
      b.range.begin = r.u64();
      b.range.end = r.u64();
      b.compute_seconds = r.f64();
      b.block = r.matrix();
      m.body = std::move(b);
      break;
    }
    case MsgKind::JobAccepted: {
      JobAcceptedBody b;
      b.policy = read_policy(r);
      b.p_total = r.f64();
      b.predicted_finish_s = r.f64();
      std::size_t n = r.u16();
      b.shares.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        JobShare s;
        s.provider_id = r.str16();
        s.endpoint = r.endpoint();
        s.range.begin = r.u64();
        s.range.end = r.u64();
        b.shares.push_back(std::move(s));
      }
      m.body = std::move(b);
      break;
    }
    case MsgKind::ErrorReport: {
      ErrorBody b;
      b.code = r.str16();
      b.detail = r.str16();
      m.body = std::move(b);
      break;
    }
    case MsgKind::StatusRequest:
      m.body = StatusRequestBody{};
      break;
    case MsgKind::StatusReply: {
      StatusReplyBody b;
      std::size_t n = r.u16();
      b.providers.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        ProviderStatus p;
        p.id = r.str16();
        p.endpoint = r.endpoint();
        p.performance = r.f64();
        p.last_seen_age_s = r.f64();
        p.rtt_ms = r.f64();
        p.services = r.strings();
        b.providers.push_back(std::move(p));
      }
      m.body = std::move(b);
      break;
    }
  }
  r.finish();
  return m;
}

Message decode(const std::vector<std::uint8_t>& frame) { return decode(frame.data(), frame.size()); }

void FrameReader::feed(const std::uint8_t* data, std::size_t size) {
  if (consumed_ > 0 && consumed_ == buffer_.size()) {
    buffer_.clear();
    consumed_ = 0;
  }
  buffer_.insert(buffer_.end(), data, data + size);
}

std::optional<Message> FrameReader::next() {
  std::size_t avail = buffer_.size() - consumed_;
  if (avail < 4) return std::nullopt;
  const std::uint8_t* p = buffer_.data() + consumed_;
  std::uint32_t declared = 0;
  for (int i = 0; i < 4; ++i) declared = (declared << 8) | p[i];
  if (declared > kMaxPayload) fail(Errc::decode_error, "declared payload exceeds 2^31 - 1");
  if (avail < std::size_t(declared) + 4) return std::nullopt;
  Message m = decode(p, declared + 4);
  consumed_ += declared + 4;
  if (consumed_ == buffer_.size()) {
    buffer_.clear();
    consumed_ = 0;
  }
  return m;
}

}  // namespace tda
