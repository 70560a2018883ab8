#pragma once

#include <cctype>
#include <istream>
#include <string>
#include <vector>

#include "shallowcvx/error.hpp"

namespace scx::config {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Line-oriented `key = value` format; `#` starts a comment, blank lines are
// skipped. Later entries for the same key win.
inline std::vector<Entry> parse_config(std::istream& in) {
  std::vector<Entry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected `key = value`");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    entries.push_back({key, value, lineno});
  }
  return entries;
}

}  // namespace scx::config
