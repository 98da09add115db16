#pragma once

// RFC 4180 style CSV output: header row, rows ending in '\n', '.' decimal
// separator, reals with 17 significant digits.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace molab {

using CsvCell = std::variant<std::int64_t, double, std::string>;
using CsvRow = std::vector<CsvCell>;

struct CsvTable {
  std::vector<std::string> schema;
  std::vector<CsvRow> rows;

  /// Throws PreconditionError when the row width does not match the schema.
  void add(CsvRow row);
};

std::string format_real(double v);
std::string csv_escape(const std::string& s);
std::string to_csv(const CsvTable& t);
void emit_csv(const CsvTable& t, const std::filesystem::path& path);

}  // namespace molab
