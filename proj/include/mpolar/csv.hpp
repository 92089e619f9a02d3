#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mpolar/errors.hpp"

// Minimal CSV writer/reader pair. Numbers are serialized with 17 significant
// digits so that write -> read is bitwise exact. Lines starting with '#' are
// comments; leading comments precede the header, anything after the data
// rows is kept as a footer.

namespace mpolar {

inline std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> comments; // before the header, without '#'
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> footer; // after the data, without '#'

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw ParseError("csv: no column named '" + name + "'");
  }
};

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw Error("csv: cannot open '" + path + "' for writing");
  for (const auto& c : t.comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i)
    out << (i ? "," : "") << t.header[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_float(row[i]);
    out << "\n";
  }
  for (const auto& c : t.footer) out << "# " << c << "\n";
  if (!out) throw Error("csv: write to '" + path + "' failed");
}

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(strip(s.substr(start)));
      return out;
    }
    out.push_back(strip(s.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline double parse_double(const std::string& s, int line_no) {
  const std::string t = strip(s);
  if (t.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" + t + "'");
  return v;
}

} // namespace detail

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("csv: cannot open '" + path + "' for reading");
  CsvTable t;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::strip(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      std::string c = detail::strip(s.substr(1));
      if (!have_header)
        t.comments.push_back(c);
      else
        t.footer.push_back(c);
      continue;
    }
    if (!have_header) {
      t.header = detail::split_commas(s);
      have_header = true;
      continue;
    }
    if (!t.footer.empty())
      throw ParseError("line " + std::to_string(line_no) + ": data after footer comments");
    const auto fields = detail::split_commas(s);
    if (fields.size() != t.header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i)
      row[i] = detail::parse_double(fields[i], line_no);
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("csv: '" + path + "' has no header line");
  return t;
}

} // namespace mpolar
