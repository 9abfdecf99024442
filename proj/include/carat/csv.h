//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_CSV_H_
#define CARAT_CSV_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace carat {

// RFC 4180 subset: comma separated, '"' quoting, header row required.
class CsvTable {
public:
  struct Row {
    std::size_t line;
    std::vector<std::string> fields;
  };

  static CsvTable read(std::istream &in, std::string name);
  static CsvTable read_file(const std::filesystem::path &path);

  const std::string &name() const { return name_; }
  const std::vector<std::string> &header() const { return header_; }
  const std::vector<Row> &rows() const { return rows_; }

  // Index of a required column; throws DataError naming the file if absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;

  const std::string &field(const Row &row, std::size_t column) const;
  double number(const Row &row, std::size_t column) const;

private:
  std::string name_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

class CsvWriter {
public:
  explicit CsvWriter(std::ostream &out): out_(out) { }

  void row(const std::vector<std::string> &fields);

private:
  std::ostream &out_;
};

// Shortest representation that reads back to the same double.
std::string format_number(double value);

}  // namespace carat

#endif  // CARAT_CSV_H_
