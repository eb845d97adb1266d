#ifndef WEBSTER_TABLE_IO_HPP
#define WEBSTER_TABLE_IO_HPP

// Column-oriented numeric text tables: whitespace- or comma-separated,
// `#` comments, optional header row of column names. Both the profile and the
// initial-condition readers go through here, so every CSV this project writes
// can be read back.

#include <webster/error.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace webster::io {

struct Table {
  std::vector<std::string> names;          // empty when there is no header
  std::vector<std::vector<double>> rows;

  /// Index of a named column, or `fallback` when there is no header.
  std::size_t column(const std::string& name, std::size_t fallback) const {
    if (names.empty()) return fallback;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw ConfigError("table has no column named '" + name + "'");
  }

  std::vector<double> values(std::size_t col) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
      if (col >= r.size()) throw ConfigError("table row too short");
      out.push_back(r[col]);
    }
    return out;
  }
};

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0' && errno != ERANGE;
}

inline Table parse_table(std::istream& in, const std::string& origin) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& f : fields) {
      double v;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (t.rows.empty() && t.names.empty()) {
        t.names = fields;
        continue;
      }
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": non-numeric field");
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw ConfigError(origin + ": no numeric rows");
  return t;
}

inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file '" + path + "'");
  return parse_table(in, path);
}

}  // namespace webster::io

#endif  // WEBSTER_TABLE_IO_HPP
