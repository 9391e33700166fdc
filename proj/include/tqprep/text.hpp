#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tqprep::text {

// Invalid UTF-8 bytes decode as U+FFFD one byte at a time.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::string to_upper_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Collapses runs of whitespace to one space and trims.
std::string collapse_whitespace(std::string_view s);

// Extracts the body of the first ``` fenced block whose info string is empty or
// matches `lang` (case-insensitive). Returns false when there is none.
bool fenced_block(std::string_view response, std::string_view lang, std::string& body);

}  // namespace tqprep::text
