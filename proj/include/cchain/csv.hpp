#pragma once

// Minimal CSV reader/writer: comma separated, double-quote quoting, LF or
// CRLF line endings. Enough for questionnaire sheets and reports.

#include <string>
#include <string_view>
#include <vector>

#include "cchain/error.hpp"

namespace cchain::csv {

using Row = std::vector<std::string>;

/// Parse a whole document. Blank lines are skipped. Line numbers in errors are 1-based.
inline std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1, column = 0;

  auto end_row = [&] {
    if (field_started || !row.empty()) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    ++column;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') {
          ++line;
          column = 0;
        }
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw SyntaxError("quote inside unquoted field", line, column);
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        column = 0;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw SyntaxError("unterminated quoted field", line, column);
  end_row();
  return rows;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string join(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += escape(row[i]);
  }
  return out;
}

/// Header plus rows, LF endings, trailing newline.
inline std::string write(const Row& header, const std::vector<Row>& rows) {
  std::string out = join(header) + "\n";
  for (const auto& r : rows) out += join(r) + "\n";
  return out;
}

}  // namespace cchain::csv
