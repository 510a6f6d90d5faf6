#pragma once
// Small helpers for the delimited-text formats read and written by the
// library.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lolo::text {

std::string_view trim(std::string_view s);

/// Split one comma-separated record. Double-quoted fields may contain commas;
/// a doubled quote inside a quoted field is a literal quote.
std::vector<std::string> split_record(std::string_view line, char delim = ',');

std::vector<std::string> split(std::string_view s, char delim);

/// Whole-string parse; nullopt on trailing garbage, empty input or non-finite.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace lolo::text
