#pragma once

#include <map>
#include <string>
#include <string_view>

namespace cqnls {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double x);

/// Parses a double, accepting "inf"/"-inf"/"nan"; throws Error(invalid_argument).
double parse_double(std::string_view s);

/// Flat "key = value" configuration; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text);
std::string format_key_values(const KeyValues& kv);

}  // namespace cqnls
