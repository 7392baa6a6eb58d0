#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace heartval {

// Shortest decimal form that round-trips the exact double (std::to_chars).
std::string fmt_double(double v);

// Strict parses over the whole token; throw MalformedRow otherwise.
double parse_double(std::string_view token);
long parse_long(std::string_view token);

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Whole-file helpers; throw IoError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Non-comment key=value pairs of a config file, in file order. Lines starting
// with '#' (after leading spaces) and blank lines are skipped; values keep
// internal characters verbatim. Throws MalformedRow on a line without '='.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

}  // namespace heartval
