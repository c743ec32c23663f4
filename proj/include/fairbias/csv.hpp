#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fairbias::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: comma separated, double-quote quoting with "" escapes,
// CRLF or LF line endings, quoted fields may span lines. Unquoted fields are
// trimmed of surrounding ASCII whitespace. Throws DataError(malformed_csv).
std::vector<Row> parse(std::string_view text);

std::vector<Row> read_file(const std::string& path);

// Quotes the field only when needed.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);

} // namespace fairbias::csv
