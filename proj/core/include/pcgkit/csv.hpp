#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pcgkit::csv {

// Split one line on a delimiter. No quoting support: the formats this
// library reads never contain embedded delimiters.
std::vector<std::string> split(std::string_view line, char delim = ',');

// Split on runs of tabs/spaces.
std::vector<std::string> split_whitespace(std::string_view line);

std::string_view trim(std::string_view s);

// Strict numeric parsing; throws ValidationError with `what` in the message.
double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);

// Shortest round-trippable decimal representation.
std::string format_double(double value);

// Reads a text file into lines, stripping trailing '\r'.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace pcgkit::csv
