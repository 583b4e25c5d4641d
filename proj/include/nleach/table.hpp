#ifndef NLEACH_TABLE_HPP
#define NLEACH_TABLE_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace nleach {

/// Doubles are written with 17 significant digits so write/read round-trips
/// are bit-exact.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
  const char* p = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(p, &end);
  if (end == p || (end && *end != '\0')) {
    throw std::runtime_error(context + ": non-numeric value '" + s + "'");
  }
  return v;
}

inline long parse_long(const std::string& s, const std::string& context) {
  const char* p = s.c_str();
  char* end = nullptr;
  const long v = std::strtol(p, &end, 10);
  if (end == p || (end && *end != '\0')) {
    throw std::runtime_error(context + ": non-integer value '" + s + "'");
  }
  return v;
}

/// Minimal delimited table: header row, comma-separated, no quoting.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  int require_column(const std::string& name) const {
    const int idx = column_index(name);
    if (idx < 0) throw std::runtime_error("missing column '" + name + "'");
    return idx;
  }
};

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline Table read_table(const std::string& path, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line, delim);
    if (t.columns.empty()) {
      t.columns = std::move(fields);
    } else {
      if (fields.size() != t.columns.size()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected " + std::to_string(t.columns.size()) +
                                 " fields, got " + std::to_string(fields.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.columns.empty()) throw std::runtime_error(path + ": empty file");
  return t;
}

inline void write_table(const std::string& path, const Table& t, char delim = ',') {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out << delim;
    out << t.columns[i];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << delim;
      out << row[i];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace nleach

#endif
