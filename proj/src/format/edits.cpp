#include "surveykg/format/edits.hpp"

#include <charconv>
#include <functional>
#include <map>

#include "surveykg/error.hpp"
#include "surveykg/text.hpp"

namespace surveykg::format {

namespace {

std::vector<std::string> tokenize(std::string_view line, int line_no) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    std::string tok;
    if (c == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '\\' && i + 1 < line.size()) {
          const char n = line[i + 1];
          tok.push_back(n == 'n' ? '\n' : n);
          i += 2;
          continue;
        }
        if (line[i] == '"') {
          closed = true;
          ++i;
          break;
        }
        tok.push_back(line[i++]);
      }
      if (!closed) throw Error(Errc::EditScriptError, "line " + std::to_string(line_no) + ": unterminated quote");
    } else {
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') tok.push_back(line[i++]);
    }
    out.push_back(std::move(tok));
  }
  return out;
}

[[noreturn]] void script_error(const EditCommand& cmd, const std::string& why) {
  throw Error(Errc::EditScriptError, "line " + std::to_string(cmd.line) + ": " + why);
}

std::optional<std::size_t> as_index(std::string_view s) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::size_t row_arg(const EditCommand& cmd, std::size_t i) {
  const auto v = as_index(cmd.tokens.at(i));
  if (!v) script_error(cmd, "expected a row number, got '" + cmd.tokens[i] + "'");
  return *v;
}

std::size_t col_arg(const SurveyTable& t, const EditCommand& cmd, std::size_t i) {
  const std::string& tok = cmd.tokens.at(i);
  if (const auto v = as_index(tok)) return *v;
  const std::string key = text::normalize_key(tok);
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    if (text::normalize_key(t.columns[c].label) == key) return c;
  }
  throw Error(Errc::IndexOutOfRange, "no column labelled '" + tok + "'");
}

Kind kind_arg(const EditCommand& cmd, std::size_t i) {
  const std::string& tok = cmd.tokens.at(i);
  if (text::iequals(tok, "resource")) return Kind::Resource;
  if (text::iequals(tok, "literal")) return Kind::Literal;
  script_error(cmd, "expected literal or resource, got '" + tok + "'");
}

struct Spec {
  std::size_t min_args;
  std::size_t max_args;  // SIZE_MAX for variadic
  std::function<SurveyTable(const SurveyTable&, const EditCommand&)> apply;
};

const std::map<std::string, Spec>& commands() {
  static const std::map<std::string, Spec> table = {
      {"transpose", {0, 0, [](const SurveyTable& t, const EditCommand&) { return transpose(t); }}},
      {"merge_rows",
       {2, 3,
        [](const SurveyTable& t, const EditCommand& c) {
          return merge_rows(t, row_arg(c, 1), row_arg(c, 2), c.tokens.size() > 3 ? c.tokens[3] : " ");
        }}},
      {"split_column",
       {2, 2, [](const SurveyTable& t, const EditCommand& c) { return split_column(t, col_arg(t, c, 1), c.tokens[2]); }}},
      {"merge_columns",
       {4, SIZE_MAX,
        [](const SurveyTable& t, const EditCommand& c) {
          std::vector<std::size_t> cols;
          for (std::size_t i = 3; i < c.tokens.size(); ++i) cols.push_back(col_arg(t, c, i));
          return merge_columns(t, cols, c.tokens[2], c.tokens[1]);
        }}},
      {"drop_column", {1, 1, [](const SurveyTable& t, const EditCommand& c) { return drop_column(t, col_arg(t, c, 1)); }}},
      {"drop_row", {1, 1, [](const SurveyTable& t, const EditCommand& c) { return drop_row(t, row_arg(c, 1)); }}},
      {"add_column",
       {1, 3,
        [](const SurveyTable& t, const EditCommand& c) {
          const Kind k = c.tokens.size() > 2 ? kind_arg(c, 2) : Kind::Literal;
          std::optional<std::size_t> pos;
          if (c.tokens.size() > 3) pos = row_arg(c, 3);
          return add_column(t, c.tokens[1], k, pos);
        }}},
      {"rename_column",
       {2, 2, [](const SurveyTable& t, const EditCommand& c) { return rename_column(t, col_arg(t, c, 1), c.tokens[2]); }}},
      {"set_kind",
       {2, 2, [](const SurveyTable& t, const EditCommand& c) { return set_kind(t, col_arg(t, c, 1), kind_arg(c, 2)); }}},
      {"set_reference_column",
       {1, 1, [](const SurveyTable& t, const EditCommand& c) { return set_reference_column(t, col_arg(t, c, 1)); }}},
      {"set_cell",
       {3, 3,
        [](const SurveyTable& t, const EditCommand& c) {
          return set_cell(t, row_arg(c, 1), col_arg(t, c, 2), c.tokens[3]);
        }}},
      {"legend",
       {2, 2, [](const SurveyTable& t, const EditCommand& c) { return set_legend_entry(t, c.tokens[1], c.tokens[2]); }}},
      {"expand_legend", {0, 0, [](const SurveyTable& t, const EditCommand&) { return expand_legend(t); }}},
  };
  return table;
}

}  // namespace

std::vector<EditCommand> parse_edit_script(std::string_view script) {
  std::vector<EditCommand> out;
  int line_no = 0;
  for (const auto& line : text::split(script, "\n")) {
    ++line_no;
    EditCommand cmd{line_no, tokenize(line, line_no)};
    if (cmd.tokens.empty()) continue;
    const auto it = commands().find(cmd.tokens[0]);
    if (it == commands().end()) script_error(cmd, "unknown command '" + cmd.tokens[0] + "'");
    const std::size_t args = cmd.tokens.size() - 1;
    if (args < it->second.min_args || args > it->second.max_args) {
      script_error(cmd, "wrong number of arguments for " + cmd.tokens[0]);
    }
    out.push_back(std::move(cmd));
  }
  return out;
}

SurveyTable apply_edits(const SurveyTable& table, const std::vector<EditCommand>& cmds) {
  SurveyTable t = table;
  for (const auto& cmd : cmds) {
    const auto it = commands().find(cmd.tokens.at(0));
    if (it == commands().end()) script_error(cmd, "unknown command '" + cmd.tokens[0] + "'");
    try {
      t = it->second.apply(t, cmd);
    } catch (const Error& e) {
      if (e.code() == Errc::EditScriptError) throw;
      throw Error(e.code(), "line " + std::to_string(cmd.line) + ": " + e.what());
    }
  }
  return t;
}

SurveyTable apply_edit_script(const SurveyTable& table, std::string_view script) {
  return apply_edits(table, parse_edit_script(script));
}

std::string quote_token(std::string_view token) {
  const bool plain = !token.empty() && token.find_first_of(" \t\r\n\"#\\") == std::string_view::npos;
  if (plain) return std::string(token);
  std::string out = "\"";
  for (char c : token) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace surveykg::format
