#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cwpor::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. CRLF and LF line endings are both accepted. A trailing newline
// does not produce an empty row. Throws cwpor::Error on an unterminated quote.
std::vector<Row> parse(std::string_view text);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

// Writes one row terminated by LF.
void write_row(std::ostream& out, const Row& row);

}  // namespace cwpor::csv
