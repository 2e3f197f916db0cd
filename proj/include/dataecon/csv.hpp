#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dataecon::csv {

// 17 significant digits, round-trip exact; non-finite values become "nan",
// "inf" or "-inf".
std::string format_number(double x);

double parse_number(std::string_view field);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

// Reads one record, honoring quoted fields spanning lines.  Returns
// nullopt at end of input.
std::optional<std::vector<std::string>> read_row(std::istream& is);

}  // namespace dataecon::csv
