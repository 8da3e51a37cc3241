#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace tda {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  auto operator<=>(const Endpoint&) const = default;
};

// Parses "host:port". Port 0 is accepted only when allow_ephemeral is set
// (listeners use it to request an OS-assigned port).
Endpoint parse_endpoint(const std::string& text, bool allow_ephemeral = false);

std::string to_string(const Endpoint& ep);

}  // namespace tda
