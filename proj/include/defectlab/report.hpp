// report.hpp — deterministic CSV (RFC 4180) and JSON artifact writers with
// atomic replace (temp file + rename), plus a small JSON-Schema subset
// validator for the shipped output schemas.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace defectlab {

/// "%.17g" — shortest round-trippable, deterministic formatting.
std::string fmt_double(double v);

/// RFC 4180: comma separated, CRLF line endings, quotes doubled and applied
/// when a field contains comma, quote, or newline. First row is the header.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Write atomically: temp file in the same directory, then rename.
void atomic_write(const std::string& path, const std::string& content);

void write_json(const std::string& path, const nlohmann::json& j);

/// Validates the subset of JSON Schema the shipped schemas use: "type",
/// "required", "properties", "items", "enum". Returns an empty string on
/// success, else the first violation.
std::string validate_against_schema(const nlohmann::json& value,
                                    const nlohmann::json& schema);

}  // namespace defectlab
