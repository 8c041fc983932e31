#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace insight::csv {

using Row = std::vector<std::string>;

/// Parses RFC 4180 text (quoted fields, doubled quotes, CRLF or LF).
/// Throws insight::ParseError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Quotes a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

std::string join_row(const Row& row);

}  // namespace insight::csv
