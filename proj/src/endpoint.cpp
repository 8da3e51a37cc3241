#include "tda/endpoint.hpp"

#include <cstdlib>

#include "tda/error.hpp"

namespace tda {

Endpoint parse_endpoint(const std::string& text, bool allow_ephemeral) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
    fail(Errc::invalid_argument, "endpoint must be host:port, got '" + text + "'");
  std::string host = text.substr(0, colon);
  std::string port_text = text.substr(colon + 1);
  char* end = nullptr;
  long port = std::strtol(port_text.c_str(), &end, 10);
  if (end == nullptr || *end != '\0' || port < 0 || port > 65535)
    fail(Errc::invalid_argument, "port out of range in '" + text + "'");
  if (port == 0 && !allow_ephemeral)
    fail(Errc::invalid_argument, "port must be 1-65535 in '" + text + "'");
  return Endpoint{host, static_cast<std::uint16_t>(port)};
}

std::string to_string(const Endpoint& ep) {
  return ep.host + ":" + std::to_string(ep.port);
}

}  // namespace tda
