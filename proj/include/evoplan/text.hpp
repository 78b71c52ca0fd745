#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evoplan {

/// Shortest decimal text that parses back to exactly `v`; '.' separator
/// regardless of locale.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);

/// Splits one CSV record on commas. Quoting is not supported; writers reject
/// names containing commas, quotes or line breaks.
std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

/// True when `s` can be written as an unquoted CSV field.
bool plain_field(std::string_view s);

}  // namespace evoplan
