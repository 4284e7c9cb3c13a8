#include "defectlab/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace defectlab {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw std::invalid_argument("CsvWriter: row width mismatch");
  rows_.push_back(std::move(row));
}

namespace {
std::string csv_escape(const std::string& s) {
  const bool needs_quote = s.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}
}  // namespace

std::string CsvWriter::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(row[i]);
    }
    out += "\r\n";
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("atomic_write: cannot open " + tmp);
    os.write(content.data(), std::streamsize(content.size()));
    if (!os) throw std::runtime_error("atomic_write: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("atomic_write: rename failed for " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

namespace {
bool type_matches(const nlohmann::json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}
}  // namespace

std::string validate_against_schema(const nlohmann::json& value,
                                    const nlohmann::json& schema) {
  if (schema.contains("type")) {
    const std::string t = schema["type"].get<std::string>();
    if (!type_matches(value, t)) return "expected type " + t;
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == value;
    if (!found) return "value not in enum";
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"]) {
      const std::string k = key.get<std::string>();
      if (!value.contains(k)) return "missing required key '" + k + "'";
    }
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [k, sub] : schema["properties"].items()) {
      if (!value.contains(k)) continue;
      const std::string err = validate_against_schema(value.at(k), sub);
      if (!err.empty()) return k + ": " + err;
    }
  }
  if (schema.contains("items") && value.is_array()) {
    for (const auto& item : value) {
      const std::string err = validate_against_schema(item, schema["items"]);
      if (!err.empty()) return "items: " + err;
    }
  }
  return "";
}

}  // namespace defectlab
