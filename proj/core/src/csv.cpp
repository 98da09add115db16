#include "molab/csv.hpp"

#include <cmath>
#include <fmt/format.h>

#include "molab/error.hpp"
#include "molab/io.hpp"

namespace molab {

void CsvTable::add(CsvRow row) {
  if (row.size() != schema.size())
    throw PreconditionError(fmt::format("row has {} cells, schema has {}", row.size(), schema.size()), "row");
  rows.push_back(std::move(row));
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const CsvTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.schema.size(); ++i) out += (i ? "," : "") + csv_escape(t.schema[i]);
  out += '\n';
  for (const CsvRow& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const auto* n = std::get_if<std::int64_t>(&row[i]))
        out += std::to_string(*n);
      else if (const auto* d = std::get_if<double>(&row[i]))
        out += format_real(*d);
      else
        out += csv_escape(std::get<std::string>(row[i]));
    }
    out += '\n';
  }
  return out;
}

void emit_csv(const CsvTable& t, const std::filesystem::path& path) { write_text_file(path, to_csv(t)); }

}  // namespace molab
