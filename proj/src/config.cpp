#include "tda/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tda/error.hpp"

namespace tda {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::invalid_config, "line " + std::to_string(line_no) + " is not 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      fail(Errc::invalid_config, "empty key on line " + std::to_string(line_no));
    out[key] = value;
  }
  return out;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::invalid_config, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_double(item, "list item"));
  return out;
}

std::vector<std::uint64_t> parse_uint_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_uint(item, "list item"));
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  std::string t = trim(text);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end == nullptr || *end != '\0')
    fail(Errc::invalid_config, key + ": '" + text + "' is not a number");
  return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& key) {
  std::string t = trim(text);
  char* end = nullptr;
  unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || end == nullptr || *end != '\0' || t[0] == '-')
    fail(Errc::invalid_config, key + ": '" + text + "' is not a nonnegative integer");
  return v;
}

}  // namespace tda
