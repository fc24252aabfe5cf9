// SPDX-License-Identifier: Apache-2.0
//
// Deterministic CSV output: '#' key=value header lines, one column-name row,
// shortest round-trip floats, LF line endings.
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gammashape/errors.hpp"

namespace gammashape::cli {

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

using Cell = std::variant<double, std::int64_t, std::string>;

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

using Header = std::vector<std::pair<std::string, std::string>>;

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const Header& header, const std::vector<std::string>& columns)
      : out_(path, std::ios::binary), columns_(columns.size()) {
    if (!out_) throw ConfigError("cannot write '" + path + "'");
    for (const auto& [k, v] : header) out_ << "# " << k << '=' << v << '\n';
    write_strings(columns);
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw NumericalError("CSV row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_cell(cells[i]);
    }
    out_ << '\n';
  }

 private:
  void write_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace gammashape::cli
