#include "surveykg/csv.hpp"

#include <fstream>
#include <sstream>

#include "surveykg/error.hpp"

namespace surveykg::csv {

namespace {

bool needs_quotes(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view field, bool force_quotes) {
  if (!force_quotes && !needs_quotes(field)) {
    out += field;
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::string write(const std::vector<Record>& records) {
  std::string out;
  for (const auto& rec : records) {
    const bool lone_empty = rec.size() == 1 && rec[0].empty();
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (i) out.push_back(',');
      append_field(out, rec[i], lone_empty);
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<Record> parse(std::string_view data) {
  if (data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);

  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = data.size();

  auto fail = [&](const std::string& why) {
    throw Error(Errc::CsvParseError, "line " + std::to_string(line) + ": " + why);
  };

  while (i < n) {
    // start of a field
    if (data[i] == '"') {
      ++i;
      while (true) {
        if (i >= n) fail("unterminated quoted field");
        char c = data[i];
        if (c == '"') {
          if (i + 1 < n && data[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (c == '\n') ++line;
        field.push_back(c);
        ++i;
      }
      if (i < n && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
        fail("unexpected character after closing quote");
      }
    } else {
      while (i < n && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
        if (data[i] == '"') fail("quote inside unquoted field");
        field.push_back(data[i]);
        ++i;
      }
    }

    current.push_back(std::move(field));
    field.clear();

    if (i >= n) break;
    if (data[i] == ',') {
      ++i;
      if (i >= n) current.emplace_back();
      continue;
    }
    if (data[i] == '\r') {
      ++i;
      if (i < n && data[i] != '\n') fail("bare CR");
    }
    if (i < n && data[i] == '\n') ++i;
    ++line;
    records.push_back(std::move(current));
    current.clear();
  }
  if (!current.empty()) records.push_back(std::move(current));
  return records;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

}  // namespace surveykg::csv
