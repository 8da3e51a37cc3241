#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tda {

// `key = value` lines; '#' starts a comment, blank lines ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::string& path);

// Comma-separated doubles / integers, e.g. "2.0, 1.0, 1.0".
std::vector<double> parse_double_list(const std::string& text);
std::vector<std::uint64_t> parse_uint_list(const std::string& text);

double parse_double(const std::string& text, const std::string& key);
std::uint64_t parse_uint(const std::string& text, const std::string& key);

}  // namespace tda
