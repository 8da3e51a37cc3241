#pragma once

#include <memory>
#include <optional>

#include "tda/endpoint.hpp"
#include "tda/message.hpp"

namespace tda {

// Bidirectional, ordered message channel. Contract: at most one execution
// context reads and one writes at any time; there are no multi-writer
// channels. Owners that must share a writing end serialize externally.
class Channel {
public:
  virtual ~Channel() = default;

  // Throws ChannelClosed once the peer is gone, IoError on transport faults.
  virtual void send(const Message& m) = 0;

  // Blocks until a full frame arrives; nullopt after a clean close.
  virtual std::optional<Message> receive() = 0;

  virtual void close() = 0;
};

class Listener {
public:
  virtual ~Listener() = default;

  // Blocks; nullptr once the listener is closed.
  virtual std::unique_ptr<Channel> accept() = 0;

  // Resolved address (an ephemeral port 0 request shows the assigned port).
  virtual Endpoint local_endpoint() const = 0;

  virtual void close() = 0;
};

// Factory for channels and listeners; lets the coordinator, providers and
// clients run unchanged over real sockets or the in-process loopback.
class Transport {
public:
  virtual ~Transport() = default;
  virtual std::unique_ptr<Channel> connect(const Endpoint& ep) = 0;
  virtual std::unique_ptr<Listener> listen(const Endpoint& ep) = 0;
};

// In-process transport backed by queues; used by tests and in-process
// clusters. Endpoints live in a registry private to each instance.
std::unique_ptr<Transport> make_loopback_transport();

// Process-wide TCP transport.
Transport& tcp_transport();

// Reconnect policy for long-lived channels: up to max_attempts tries with
// delays base_ms, 2*base_ms, ... capped at cap_ms. Throws the last error.
struct BackoffPolicy {
  int max_attempts = 5;
  int base_ms = 100;
  int cap_ms = 5000;
};
std::unique_ptr<Channel> connect_with_backoff(Transport& transport, const Endpoint& ep,
                                              const BackoffPolicy& policy = {});

}  // namespace tda
