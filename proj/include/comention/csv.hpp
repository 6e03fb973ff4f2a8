#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace comention {

// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(std::string_view value);

// Splits one CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> parse_csv_line(std::string_view line);

// Nine significant digits, the fixed numeric format of every emitter.
std::string format_real(double value);

}  // namespace comention
