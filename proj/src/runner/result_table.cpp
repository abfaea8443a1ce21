// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>

#include "nfkit/errors.hpp"
#include "nfkit/runner.hpp"

namespace nfkit::runner {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ResultTable::ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw DomainError("row has " + std::to_string(row.size()) + " cells, table has " +
                      std::to_string(columns_.size()) + " columns");
  rows_.push_back(std::move(row));
}

std::size_t ResultTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  throw DomainError("no column named '" + name + "'");
}

std::string ResultTable::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + csv_escape(columns_[i]);
  out += "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      if (const auto* v = std::get_if<std::int64_t>(&row[i]))
        out += std::to_string(*v);
      else if (const auto* d = std::get_if<double>(&row[i]))
        out += format_double(*d);
      else
        out += csv_escape(std::get<std::string>(row[i]));
    }
    out += "\n";
  }
  return out;
}

Json ResultTable::to_json() const {
  Json j;
  j["columns"] = columns_;
  Json rows = Json::array();
  for (const auto& row : rows_) {
    Json r = Json::array();
    for (const Cell& c : row) {
      if (const auto* v = std::get_if<std::int64_t>(&c))
        r.push_back(*v);
      else if (const auto* d = std::get_if<double>(&c))
        r.push_back(std::isfinite(*d) ? Json(*d) : Json(format_double(*d)));
      else
        r.push_back(std::get<std::string>(c));
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string config_hash(const Json& resolved) {
  Json copy = resolved;
  if (copy.is_object()) {
    copy.erase("workers");
    copy.erase("output");
  }
  const std::string text = copy.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nfkit::runner
