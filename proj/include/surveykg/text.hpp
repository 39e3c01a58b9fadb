#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace surveykg::text {

// Unicode normalization backed by ICU. Invalid UTF-8 input is passed through
// ICU's replacement handling, so the result is always valid UTF-8.
std::string nfc(std::string_view s);
std::string casefold(std::string_view s);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

/// Matching key for labels and titles: trim, NFC, case-fold, collapse runs of
/// whitespace to one space.
std::string normalize_key(std::string_view s);

std::vector<std::string> split(std::string_view s, std::string_view delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool iequals(std::string_view a, std::string_view b);

void append_utf8(std::string& out, char32_t cp);
std::u32string to_utf32(std::string_view s);
std::string to_utf8(std::u32string_view s);

bool is_letter(char32_t cp);
bool is_upper(char32_t cp);

inline constexpr std::string_view kReplacementChar = "\xEF\xBF\xBD";

}  // namespace surveykg::text
