#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "gsom/error.hpp"

namespace gsom {

/// Shortest decimal string that parses back to exactly x.
inline std::string format_roundtrip(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// x with `digits` significant digits (tabular output).
inline std::string format_sig(double x, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return std::string(buf);
}

/// x as a fixed-point string with `decimals` places (percent tables).
inline std::string format_fixed(double x, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return std::string(buf);
}

inline double parse_double(const std::string& s, const std::string& where) {
  const char* b = s.data();
  const char* e = b + s.size();
  double v = 0;
  auto res = std::from_chars(b, e, v);
  require(res.ec == std::errc() && res.ptr == e, where + ": cannot parse number '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& where) {
  const char* b = s.data();
  const char* e = b + s.size();
  std::int64_t v = 0;
  auto res = std::from_chars(b, e, v);
  require(res.ec == std::errc() && res.ptr == e, where + ": cannot parse integer '" + s + "'");
  return v;
}

/// Splits one line at commas. No quoting: fields must not contain commas
/// or newlines. A trailing '\r' is stripped first.
inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += fields[i];
  }
  return out;
}

/// A parsed delimited text file: header row plus data rows.
struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] aligns with header
  std::vector<std::int64_t> line_numbers;      // 1-based file line of each row

  /// Column index of `name`, or -1.
  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline CsvFile read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open file: " + path.string());
  CsvFile csv;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      csv.header = split_csv_line(line);
      continue;
    }
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    require(fields.size() == csv.header.size(),
            path.string() + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(csv.header.size()) + " fields, got " + std::to_string(fields.size()));
    csv.rows.push_back(std::move(fields));
    csv.line_numbers.push_back(line_no);
  }
  require(!csv.header.empty(), "empty file: " + path.string());
  return csv;
}

/// Writes content to path via a temp file + rename, so interrupted runs
/// leave no partial artifact.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot write file: " + tmp.string());
    out << content;
    out.flush();
    require(out.good(), "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gsom
