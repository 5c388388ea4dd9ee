#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace drtalk {

// RFC-4180-style CSV: header row, comma separator, '.' decimal point,
// CRLF-free LF line endings, UTF-8. Numbers are printed with a fixed
// round-trip format so identical runs produce byte-identical files.
class CsvWriter {
 public:
  using Cell = std::variant<std::string, double, long long>;

  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open output file " + path);
  }

  void header(std::initializer_list<std::string> names) {
    bool first = true;
    for (const std::string& name : names) {
      if (!first) out_ << ',';
      out_ << escape(name);
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<Cell> cells) {
    bool first = true;
    for (const Cell& cell : cells) {
      if (!first) out_ << ',';
      if (std::holds_alternative<std::string>(cell)) {
        out_ << escape(std::get<std::string>(cell));
      } else if (std::holds_alternative<double>(cell)) {
        out_ << format_double(std::get<double>(cell));
      } else {
        out_ << std::to_string(std::get<long long>(cell));
      }
      first = false;
    }
    out_ << '\n';
  }

  static std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
  }

 private:
  static std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    return quoted;
  }

  std::ofstream out_;
};

}  // namespace drtalk
