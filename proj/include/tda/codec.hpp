#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tda/message.hpp"

namespace tda {

// Frame layout (all integers big-endian):
//   4 bytes  payload length N (excludes these 4 bytes), N <= 2^31 - 1
//   1 byte   kind tag
//   8 bytes  job_id
//   2 bytes  sender_id length, then that many UTF-8 bytes
//   ...      kind-specific body
// docs/protocol.md is the normative description with worked examples.
std::vector<std::uint8_t> encode(const Message& m);

// Decodes exactly one complete frame (prefix included). Trailing or missing
// bytes are a DecodeError; an unrecognized kind tag is UnknownKind.
Message decode(const std::uint8_t* frame, std::size_t size);
Message decode(const std::vector<std::uint8_t>& frame);

// Incremental decoder for a byte stream: feed arbitrary chunks, pop complete
// messages. Chunking never changes what comes out.
class FrameReader {
public:
  void feed(const std::uint8_t* data, std::size_t size);
  std::optional<Message> next();

  // Bytes of the partial frame still buffered.
  std::size_t pending() const { return buffer_.size() - consumed_; }

private:
  std::vector<std::uint8_t> buffer_;
  std::size_t consumed_ = 0;
};

}  // namespace tda
