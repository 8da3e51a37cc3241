#include "tda/channel.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "tda/codec.hpp"

namespace tda {
namespace {

// One direction of a loopback channel.
struct MsgQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Message> items;
  bool closed = false;

  void push(const Message& m) {
    {
      std::lock_guard lock(mu);
      if (closed) fail(Errc::channel_closed, "peer closed");
      items.push_back(m);
    }
    cv.notify_one();
  }

  std::optional<Message> pop() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return closed || !items.empty(); });
    if (items.empty()) return std::nullopt;
    Message m = std::move(items.front());
    items.pop_front();
    return m;
  }

  void close() {
    {
      std::lock_guard lock(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class LoopbackChannel final : public Channel {
public:
  LoopbackChannel(std::shared_ptr<MsgQueue> in, std::shared_ptr<MsgQueue> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  ~LoopbackChannel() override { close(); }

  void send(const Message& m) override {
    // Round-trip through the codec so loopback exercises the same encoding
    // guarantees (and rejections) as TCP.
    out_->push(decode(encode(m)));
  }

  std::optional<Message> receive() override { return in_->pop(); }

  void close() override {
    out_->close();
    in_->close();
  }

private:
  std::shared_ptr<MsgQueue> in_;
  std::shared_ptr<MsgQueue> out_;
};

struct PendingAccepts {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::unique_ptr<Channel>> ready;
  bool closed = false;
};

class LoopbackTransport;

class LoopbackListener final : public Listener {
public:
  LoopbackListener(LoopbackTransport& owner, Endpoint ep,
                   std::shared_ptr<PendingAccepts> pending)
      : owner_(owner), endpoint_(std::move(ep)), pending_(std::move(pending)) {}

  ~LoopbackListener() override { close(); }

  std::unique_ptr<Channel> accept() override {
    std::unique_lock lock(pending_->mu);
    pending_->cv.wait(lock, [&] { return pending_->closed || !pending_->ready.empty(); });
    if (pending_->ready.empty()) return nullptr;
    auto ch = std::move(pending_->ready.front());
    pending_->ready.pop_front();
    return ch;
  }

  Endpoint local_endpoint() const override { return endpoint_; }

  void close() override;

private:
  LoopbackTransport& owner_;
  Endpoint endpoint_;
  std::shared_ptr<PendingAccepts> pending_;
};

class LoopbackTransport final : public Transport {
public:
  std::unique_ptr<Channel> connect(const Endpoint& ep) override {
    std::shared_ptr<PendingAccepts> pending;
    {
      std::lock_guard lock(mu_);
      auto it = listeners_.find(ep);
      if (it == listeners_.end())
        fail(Errc::io_error, "connection refused: no listener at " + to_string(ep));
      pending = it->second;
    }
    auto a = std::make_shared<MsgQueue>();  // client -> server
    auto b = std::make_shared<MsgQueue>();  // server -> client
    auto server_end = std::make_unique<LoopbackChannel>(a, b);
    {
      std::lock_guard lock(pending->mu);
      if (pending->closed) fail(Errc::io_error, "connection refused: listener closed");
      pending->ready.push_back(std::move(server_end));
    }
    pending->cv.notify_one();
    return std::make_unique<LoopbackChannel>(b, a);
  }

  std::unique_ptr<Listener> listen(const Endpoint& ep) override {
    std::lock_guard lock(mu_);
    Endpoint bound = ep;
    if (bound.port == 0) bound.port = next_port_++;
    if (listeners_.count(bound))
      fail(Errc::io_error, "address in use: " + to_string(bound));
    auto pending = std::make_shared<PendingAccepts>();
    listeners_[bound] = pending;
    return std::make_unique<LoopbackListener>(*this, bound, pending);
  }

  void remove(const Endpoint& ep) {
    std::lock_guard lock(mu_);
    listeners_.erase(ep);
  }

private:
  std::mutex mu_;
  std::map<Endpoint, std::shared_ptr<PendingAccepts>> listeners_;
  std::uint16_t next_port_ = 40000;
};

void LoopbackListener::close() {
  {
    std::lock_guard lock(pending_->mu);
    if (pending_->closed) return;
    pending_->closed = true;
  }
  pending_->cv.notify_all();
  owner_.remove(endpoint_);
}

}  // namespace

std::unique_ptr<Transport> make_loopback_transport() {
  return std::make_unique<LoopbackTransport>();
}

std::unique_ptr<Channel> connect_with_backoff(Transport& transport, const Endpoint& ep,
                                              const BackoffPolicy& policy) {
  int delay_ms = policy.base_ms;
  for (int attempt = 1;; ++attempt) {
    try {
      return transport.connect(ep);
    } catch (const Error&) {
      if (attempt >= policy.max_attempts) throw;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    delay_ms = std::min(delay_ms * 2, policy.cap_ms);
  }
}

}  // namespace tda
