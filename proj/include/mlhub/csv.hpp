#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mlhub::csv {

/// RFC-4180 quoting: fields containing commas, quotes, or newlines are quoted,
/// embedded quotes doubled.
std::string escape_field(std::string_view field);
std::string write_row(const std::vector<std::string>& fields);

/// Parse a full CSV document (CRLF or LF) into rows of fields.
/// Throws ValidationError on unterminated quotes.
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace mlhub::csv
