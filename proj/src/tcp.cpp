#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>

#include "tda/channel.hpp"
#include "tda/codec.hpp"

namespace tda {
namespace {

[[noreturn]] void fail_errno(const std::string& what) {
  fail(Errc::io_error, what + ": " + std::strerror(errno));
}

class TcpChannel final : public Channel {
public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  ~TcpChannel() override { close(); }

  void send(const Message& m) override {
    auto frame = encode(m);
    std::size_t sent = 0;
    while (sent < frame.size()) {
      ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EPIPE || errno == ECONNRESET)
          fail(Errc::channel_closed, "peer closed the connection");
        fail_errno("send");
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::optional<Message> receive() override {
    for (;;) {
      if (auto m = reader_.next()) return m;
      std::uint8_t chunk[16384];
      ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (closed_.load()) return std::nullopt;
        fail_errno("recv");
      }
      if (n == 0) {
        if (reader_.pending() != 0) fail(Errc::decode_error, "stream ended mid-frame");
        return std::nullopt;
      }
      reader_.feed(chunk, static_cast<std::size_t>(n));
    }
  }

  void close() override {
    bool expected = false;
    if (closed_.compare_exchange_strong(expected, true)) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
    }
  }

private:
  int fd_;
  std::atomic<bool> closed_{false};
  FrameReader reader_;
};

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  int rc = ::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res);
  if (rc != 0) fail(Errc::io_error, "cannot resolve '" + ep.host + "': " + gai_strerror(rc));
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

class TcpListener final : public Listener {
public:
  explicit TcpListener(const Endpoint& ep) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) fail_errno("socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = resolve(ep);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) fail_errno("bind");
    if (::listen(fd_, 64) < 0) fail_errno("listen");

    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    char text[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &bound.sin_addr, text, sizeof(text));
    local_ = Endpoint{text, ntohs(bound.sin_port)};
  }

  ~TcpListener() override { close(); }

  std::unique_ptr<Channel> accept() override {
    for (;;) {
      int fd = ::accept(fd_, nullptr, nullptr);
      if (fd >= 0) return std::make_unique<TcpChannel>(fd);
      if (errno == EINTR) continue;
      if (closed_.load()) return nullptr;
      fail_errno("accept");
    }
  }

  Endpoint local_endpoint() const override { return local_; }

  void close() override {
    bool expected = false;
    if (closed_.compare_exchange_strong(expected, true)) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
    }
  }

private:
  int fd_ = -1;
  std::atomic<bool> closed_{false};
  Endpoint local_;
};

class TcpTransport final : public Transport {
public:
  std::unique_ptr<Channel> connect(const Endpoint& ep) override {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) fail_errno("socket");
    sockaddr_in addr = resolve(ep);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
      int saved = errno;
      ::close(fd);
      errno = saved;
      fail_errno("connect to " + to_string(ep));
    }
    return std::make_unique<TcpChannel>(fd);
  }

  std::unique_ptr<Listener> listen(const Endpoint& ep) override {
    return std::make_unique<TcpListener>(ep);
  }
};

}  // namespace

Transport& tcp_transport() {
  static TcpTransport transport;
  return transport;
}

}  // namespace tda
