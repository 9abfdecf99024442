//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/csv.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "carat/diagnostics.h"
#include "carat/error.h"

namespace carat {
namespace {

std::vector<std::string> split_record(std::istream &in, std::size_t &line,
                                      const std::string &name, bool &eof) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  const std::size_t start_line = line;

  for (;;) {
    const int ch = in.get();
    if (ch == std::char_traits<char>::eof()) {
      if (quoted)
        throw DataError(fmt::format("{}:{}: unterminated quoted field", name,
                                    start_line));
      eof = true;
      break;
    }
    any = true;
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n')
          ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line;
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (any)
    fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string {} : s.substr(b, e - b + 1);
}

}  // namespace

std::string format_diagnostic(const Diagnostic &d) {
  std::string out = fmt::format(
      "{} [{}] {}: {}", d.severity == Severity::kError ? "error" : "warning",
      d.code, d.location, d.message);
  if (d.value)
    out += fmt::format(" (value {})", *d.value);
  return out;
}

CsvTable CsvTable::read(std::istream &in, std::string name) {
  CsvTable table;
  table.name_ = std::move(name);
  std::size_t line = 1;
  bool eof = false;

  // Skip a UTF-8 byte order mark.
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
  }

  table.header_ = split_record(in, line, table.name_, eof);
  for (auto &h: table.header_)
    h = trim(h);
  if (table.header_.empty())
    throw DataError(fmt::format("{}: missing header row", table.name_));

  while (!eof) {
    const std::size_t row_line = line;
    auto fields = split_record(in, line, table.name_, eof);
    if (fields.empty() || (fields.size() == 1 && trim(fields[0]).empty()))
      continue;
    if (fields.size() != table.header_.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, found {}",
                                  table.name_, row_line, table.header_.size(),
                                  fields.size()));
    }
    for (auto &f: fields)
      f = trim(std::move(f));
    table.rows_.push_back({ row_line, std::move(fields) });
  }
  return table;
}

CsvTable CsvTable::read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::ios_base::failure("cannot open " + path.string());
  return read(in, path.filename().string());
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - header_.begin());
}

std::size_t CsvTable::column(std::string_view name) const {
  auto index = find_column(name);
  if (!index)
    throw DataError(fmt::format("{}: missing column '{}'", name_, name));
  return *index;
}

const std::string &CsvTable::field(const Row &row, std::size_t column) const {
  return row.fields.at(column);
}

double CsvTable::number(const Row &row, std::size_t column) const {
  const std::string &text = row.fields.at(column);
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(fmt::format("{}:{}: bad number '{}' in column '{}'", name_,
                                row.line, text, header_[column]));
  }
  return value;
}

void CsvWriter::row(const std::vector<std::string> &fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0)
      out_ << ',';
    const std::string &f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out_ << f;
      continue;
    }
    out_ << '"';
    for (char c: f) {
      if (c == '"')
        out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  out_ << '\n';
}

std::string format_number(double value) {
  if (value == 0)
    return "0";
  return fmt::format("{}", value);
}

}  // namespace carat
