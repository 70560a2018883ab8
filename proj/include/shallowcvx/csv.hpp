#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace scx::csv {

// 17 significant digits: round-trip exact for 64-bit floats, so identical
// values always render to identical bytes.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline void write_provenance(std::ostream& out,
                             const std::string& tool_line,
                             const std::vector<std::pair<std::string, std::string>>& config) {
  out << "# " << tool_line << "\n";
  for (const auto& [key, value] : config) {
    out << "# " << key << " = " << value << "\n";
  }
}

inline void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace scx::csv
