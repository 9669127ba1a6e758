#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ctrex::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// Blank lines are skipped. Throws DataError on an unterminated quote.
std::vector<Record> parse(std::string_view text);

/// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

}  // namespace ctrex::csv
