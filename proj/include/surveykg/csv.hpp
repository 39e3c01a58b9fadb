#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace surveykg::csv {

using Record = std::vector<std::string>;

// RFC 4180 with LF record terminators. Fields are quoted only when they
// contain a comma, a quote, CR or LF, or when a record consists of a single
// empty field (otherwise it would serialize as a blank line).
std::string write(const std::vector<Record>& records);

// Accepts LF or CRLF terminators and an optional UTF-8 BOM. A trailing
// terminator does not start a new record. Throws Error{CsvParseError} on an
// unterminated quoted field or stray characters after a closing quote.
std::vector<Record> parse(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace surveykg::csv
