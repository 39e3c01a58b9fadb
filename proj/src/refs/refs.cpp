#include "surveykg/refs/refs.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "surveykg/error.hpp"
#include "surveykg/layout/layout.hpp"
#include "surveykg/text.hpp"
#include "names.hpp"

namespace surveykg::refs {

using detail::is_initials_token;
using detail::name_tokens;
using detail::split_family;

namespace {

bool has_letter(std::string_view s) {
  for (char32_t cp : text::to_utf32(s)) {
    if (text::is_letter(cp)) return true;
  }
  return false;
}

bool has_digit(std::string_view s) { return s.find_first_of("0123456789") != std::string_view::npos; }

std::string strip_edges(std::string s, std::string_view chars) {
  while (!s.empty() && chars.find(s.back()) != std::string_view::npos) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && chars.find(s[i]) != std::string_view::npos) ++i;
  return text::trim(s.substr(i));
}

/// "Family, Given" for a single name written without a comma.
std::string format_plain_name(std::string_view name) {
  const auto tokens = name_tokens(name);
  if (tokens.empty()) return "";
  const auto [family, given] = split_family(tokens);
  std::string out = text::join(family, " ");
  if (!given.empty()) out += ", " + text::join(given, " ");
  return out;
}

bool all_initials(std::string_view part) {
  const auto tokens = text::split(text::collapse_whitespace(text::trim(part)), " ");
  if (tokens.empty()) return false;
  for (const auto& t : tokens) {
    if (t.empty() || !is_initials_token(t)) return false;
  }
  return true;
}

std::vector<std::string> split_author_block(std::string block) {
  static const std::regex et_al(R"([,\s]*\bet\s+al\.?)", std::regex::icase);
  block = std::regex_replace(block, et_al, "");
  static const std::regex conj(R"(\s*,?\s+(?:and|&)\s+|\s*&\s*)");
  block = std::regex_replace(block, conj, ";");
  struct Name {
    std::string family, given;
  };
  auto token_count = [](const std::string& s) { return text::split(text::collapse_whitespace(s), " ").size(); };
  std::vector<Name> names;
  for (const auto& group : text::split(block, ";")) {
    std::vector<std::string> parts;
    for (const auto& p : text::split(group, ",")) {
      if (!strip_edges(text::trim(p), " .").empty()) parts.push_back(text::trim(p));
    }
    // "Family, Given" pairs: the given part is initials, or both are one word.
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const bool pair = i + 1 < parts.size() && !all_initials(parts[i]) &&
                        (all_initials(parts[i + 1]) || (token_count(parts[i]) == 1 && token_count(parts[i + 1]) == 1));
      if (pair) {
        names.push_back({parts[i], parts[i + 1]});
        ++i;
      } else {
        names.push_back({parts[i], ""});
      }
    }
  }
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (!n.given.empty()) {
      out.push_back(text::trim(n.family) + ", " + text::trim(n.given));
    } else {
      const std::string f = format_plain_name(n.family);
      if (!f.empty()) out.push_back(f);
    }
  }
  return out;
}

/// Offset of the period that closes the author block, or npos.
std::size_t author_block_period(const std::string& s) {
  std::size_t pos = 0;
  while ((pos = s.find('.', pos)) != std::string::npos) {
    const bool boundary = pos + 1 >= s.size() || s[pos + 1] == ' ';
    if (!boundary) {
      ++pos;
      continue;
    }
    // token before the period
    std::size_t b = pos;
    while (b > 0 && s[b - 1] != ' ') --b;
    const std::string token = s.substr(b, pos - b);
    if (token.empty() || text::iequals(token, "al")) {
      ++pos;
      continue;
    }
    if (!is_initials_token(token)) return pos;
    // An initial closes the block only when it trails a surname written
    // without a comma ("Roe A."), not when it follows "Doe," or leads a name.
    std::size_t e = b;
    std::string prev;
    while (e > 0) {
      std::size_t pe = e - 1;  // the space
      std::size_t pb = pe;
      while (pb > 0 && s[pb - 1] != ' ') --pb;
      prev = s.substr(pb, pe - pb);
      if (is_initials_token(prev) && prev.back() != ',') {
        e = pb;
        continue;
      }
      break;
    }
    if (e > 0 && !prev.empty() && prev.back() != ',' && prev.back() != '.' && has_letter(prev) && !has_digit(prev) &&
        !is_initials_token(prev) && !text::iequals(prev, "and") && prev != "&") {
      return pos;
    }
    ++pos;
  }
  return std::string::npos;
}

std::string first_sentence(const std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if ((c == '.' || c == '?' || c == '!') && (i + 1 == s.size() || s[i + 1] == ' ')) {
      return s.substr(0, c == '.' ? i : i + 1);
    }
  }
  return s;
}

std::optional<int> parse_marker_number(const std::string& digits) {
  try {
    const int n = std::stoi(digits);
    if (n >= 1) return n;
  } catch (...) {
  }
  return std::nullopt;
}

}  // namespace

BibEntry parse_citation_string(std::string_view raw_in) {
  BibEntry e;
  const std::string s = text::collapse_whitespace(text::nfc(text::trim(raw_in)));
  e.raw = s;
  std::string w = s;

  static const std::regex doi_re(R"((?:https?://(?:dx\.)?doi\.org/|doi:\s*|DOI:?\s*)?(10\.\d{4,9}/[^\s"<>]+))",
                                 std::regex::icase);
  std::smatch m;
  if (std::regex_search(w, m, doi_re)) {
    std::string doi = m[1].str();
    while (!doi.empty() && std::string_view(".,;)]").find(doi.back()) != std::string_view::npos) doi.pop_back();
    e.doi = doi;
    w = text::collapse_whitespace(w.substr(0, static_cast<std::size_t>(m.position(0))) + " " +
                                  w.substr(static_cast<std::size_t>(m.position(0) + m.length(0))));
  }

  for (std::size_t i = 0; i + 4 <= w.size(); ++i) {
    const bool prev_ok = i == 0 || !std::isdigit(static_cast<unsigned char>(w[i - 1]));
    const bool next_ok = i + 4 == w.size() || !std::isdigit(static_cast<unsigned char>(w[i + 4]));
    const std::string cand = w.substr(i, 4);
    if (prev_ok && next_ok && std::all_of(cand.begin(), cand.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) &&
        (cand.rfind("19", 0) == 0 || cand.rfind("20", 0) == 0)) {
      e.year = std::stoi(cand);
      break;
    }
  }

  // Author block: up to a colon, an opening quote, a parenthesized year or
  // the first period that is not part of an initial.
  const std::size_t colon = w.find(':');
  std::size_t quote = w.find('"');
  const std::size_t curly = w.find("\xE2\x80\x9C");
  if (curly != std::string::npos && (quote == std::string::npos || curly < quote)) quote = curly;
  static const std::regex year_paren(R"(\(\s*(?:19|20)\d{2}[a-z]?\s*\))");
  std::smatch ym;
  const bool has_year_paren = std::regex_search(w, ym, year_paren);
  const std::size_t yparen = has_year_paren ? static_cast<std::size_t>(ym.position(0)) : std::string::npos;

  std::string block;
  std::string rest;
  bool quoted_title = false;
  if (colon != std::string::npos && colon < quote && colon < yparen && !has_digit(w.substr(0, colon))) {
    block = w.substr(0, colon);
    rest = w.substr(colon + 1);
  } else if (quote != std::string::npos && quote < yparen) {
    block = w.substr(0, quote);
    const std::size_t open_len = w[quote] == '"' ? 1 : 3;
    const std::size_t start = quote + open_len;
    std::size_t close = w.find('"', start);
    const std::size_t close_curly = w.find("\xE2\x80\x9D", start);
    if (close_curly != std::string::npos && (close == std::string::npos || close_curly < close)) close = close_curly;
    if (close != std::string::npos) {
      e.title = strip_edges(w.substr(start, close - start), " ,.");
      quoted_title = true;
    }
  } else if (has_year_paren) {
    block = w.substr(0, yparen);
    rest = w.substr(yparen + static_cast<std::size_t>(ym.length(0)));
  } else {
    const std::size_t p = author_block_period(w);
    if (p != std::string::npos) {
      block = w.substr(0, p);
      rest = w.substr(p + 1);
    }
  }

  // Harvard style puts the year after the names: "Smith, J. 2010."
  static const std::regex trailing_year(R"([\s,]*\(?(?:19|20)\d{2}[a-z]?\)?\s*$)");
  block = std::regex_replace(block, trailing_year, "");
  block = strip_edges(block, " ,;");
  if (!block.empty() && has_letter(block) && !has_digit(block)) e.authors = split_author_block(block);

  if (!quoted_title && !rest.empty()) {
    std::string r = strip_edges(rest, " .,;:");
    static const std::regex leading_year(R"(^\(?(?:19|20)\d{2}[a-z]?\)?[.,]?\s*)");
    r = std::regex_replace(r, leading_year, "");
    const std::string t = strip_edges(first_sentence(r), " ,;:");
    if (t.size() >= 3 && has_letter(t) && t.rfind("In ", 0) != 0 && t.rfind("in:", 0) != 0) e.title = t;
  }
  return e;
}

std::vector<BibEntry> parse_reference_list(const layout::Document& doc) {
  struct Line {
    std::size_t page;
    layout::TextLine line;
  };
  std::vector<Line> lines;
  for (const auto& page : doc.pages) {
    for (auto& l : layout::group_lines(page.glyphs, layout::kReadingOrderTolerance)) lines.push_back({page.index, l});
  }
  static const std::regex heading(R"(^(?:\d+(?:\.\d+)*\.?\s+)?(references|bibliography)\s*:?$)", std::regex::icase);
  std::optional<std::size_t> start;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (std::regex_match(text::trim(lines[i].line.text), heading)) start = i;
  }
  if (!start) throw Error(Errc::NoReferenceSection, "no References or Bibliography heading in " + doc.source_path);

  std::vector<Line> body(lines.begin() + static_cast<std::ptrdiff_t>(*start + 1), lines.end());
  static const std::regex bracket(R"(^\[(\d{1,4})\]\s*(.*)$)");
  static const std::regex dotted(R"(^(\d{1,4})\.\s+(.*)$)");
  enum class Style { Bracket, Dotted, Hanging };
  Style style = Style::Hanging;
  if (!body.empty()) {
    const std::string first = text::trim(body.front().line.text);
    if (std::regex_match(first, bracket)) {
      style = Style::Bracket;
    } else if (std::regex_match(first, dotted)) {
      style = Style::Dotted;
    }
  }
  double margin = 1e300;
  for (const auto& l : body) margin = std::min(margin, l.line.box.x0);

  struct Pending {
    std::optional<int> marker;
    std::vector<std::string> parts;
  };
  std::vector<Pending> pending;
  std::optional<int> last_marker;
  for (const auto& l : body) {
    const std::string t = text::trim(l.line.text);
    if (t.empty()) continue;
    std::smatch m;
    const bool at_margin = l.line.box.x0 <= margin + 2.0;
    bool marked = (style == Style::Bracket && std::regex_match(t, m, bracket)) ||
                  (style == Style::Dotted && std::regex_match(t, m, dotted));
    std::optional<int> n = marked ? parse_marker_number(m[1].str()) : std::nullopt;
    // "2016. Title" wrapped onto an indented line is not a new entry
    if (marked && last_marker && (!n || *n <= *last_marker || (!at_margin && *n != *last_marker + 1))) marked = false;
    if (marked) {
      pending.push_back({n, {m[2].str()}});
      last_marker = n;
    } else if (style == Style::Hanging && l.line.box.x0 <= margin + 2.0) {
      pending.push_back({std::nullopt, {t}});
    } else if (!pending.empty()) {
      pending.back().parts.push_back(t);
    }
  }
  std::vector<BibEntry> out;
  for (const auto& p : pending) {
    const std::string raw = text::trim(text::join(p.parts, " "));
    if (raw.empty()) continue;
    BibEntry e = parse_citation_string(raw);
    if (p.marker) e.key = NumericKey{*p.marker};
    out.push_back(std::move(e));
  }
  return out;
}

std::optional<BibEntry> link_key(const CitationKey& key, const std::vector<BibEntry>& entries) {
  if (const auto* n = std::get_if<NumericKey>(&key)) {
    std::optional<BibEntry> hit;
    int hits = 0;
    for (const auto& e : entries) {
      if (e.key && std::holds_alternative<NumericKey>(*e.key) && std::get<NumericKey>(*e.key).n == n->n) {
        hit = e;
        ++hits;
      }
    }
    return hits == 1 ? hit : std::nullopt;
  }
  std::string surname;
  int year = 0;
  std::optional<char> suffix;
  if (const auto* ay = std::get_if<AuthorYearKey>(&key)) {
    surname = ay->surname;
    year = ay->year;
    suffix = ay->suffix;
  } else {
    const auto& g = std::get<GeneratedKey>(key);
    surname = g.surname;
    year = g.year;
  }
  std::vector<const BibEntry*> hits;
  for (const auto& e : entries) {
    if (e.authors.empty() || !e.year || *e.year != year) continue;
    if (surname_of(e.authors.front()) == surname) hits.push_back(&e);
  }
  if (suffix) {
    const std::size_t idx = static_cast<std::size_t>(*suffix - 'a');
    if (idx < hits.size()) return *hits[idx];
    return std::nullopt;
  }
  if (hits.size() == 1) return *hits.front();
  return std::nullopt;
}

std::vector<LinkResult> link_rows(const format::SurveyTable& table, const std::vector<BibEntry>& entries) {
  std::vector<LinkResult> out;
  const auto rc = table.reference_column();
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    LinkResult lr;
    lr.row_index = static_cast<int>(r);
    if (rc && *rc < table.rows[r].size()) lr.key_text = table.rows[r][*rc];
    try {
      lr.entry = link_key(parse_citation_key(lr.key_text), entries);
    } catch (const Error& e) {
      if (e.code() != Errc::UnrecognizedKeyFormat) throw;
    }
    out.push_back(std::move(lr));
  }
  return out;
}

format::SurveyTable append_metadata_columns(const format::SurveyTable& table, const std::vector<LinkResult>& links) {
  std::vector<const LinkResult*> by_row(table.n_rows(), nullptr);
  bool coverage_ok = links.size() == table.n_rows();
  for (const auto& l : links) {
    if (l.row_index < 0 || static_cast<std::size_t>(l.row_index) >= table.n_rows() ||
        by_row[static_cast<std::size_t>(l.row_index)]) {
      coverage_ok = false;
      break;
    }
    by_row[static_cast<std::size_t>(l.row_index)] = &l;
  }
  if (!coverage_ok) {
    throw Error(Errc::LinkCoverageMismatch, std::to_string(links.size()) + " link results for " +
                                                std::to_string(table.n_rows()) + " rows");
  }
  std::vector<std::size_t> unresolved;
  for (std::size_t r = 0; r < by_row.size(); ++r) {
    if (!by_row[r]->linked()) unresolved.push_back(r);
  }
  if (!unresolved.empty()) throw UnresolvedRowsError(unresolved);

  format::SurveyTable out = table;
  for (auto label : kMetadataLabels) {
    format::ColumnSpec c;
    c.label = std::string(label);
    c.role = format::Role::Metadata;
    out.columns.push_back(c);
  }
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    const BibEntry& e = *by_row[r]->entry;
    auto& row = out.rows[r];
    row.resize(table.n_cols());
    row.push_back(e.title.value_or(""));
    row.push_back(text::join(e.authors, "; "));
    row.push_back(e.month ? std::to_string(*e.month) : "");
    row.push_back(e.year ? std::to_string(*e.year) : "");
    row.push_back(e.doi.value_or(""));
  }
  return out;
}

double title_similarity(std::string_view a, std::string_view b) {
  auto trigrams = [](std::string_view s) {
    std::set<std::u32string> out;
    std::u32string word;
    auto flush = [&] {
      if (word.empty()) return;
      const std::u32string padded = U"  " + word + U" ";
      for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.insert(padded.substr(i, 3));
      word.clear();
    };
    for (char32_t cp : text::to_utf32(text::casefold(text::nfc(s)))) {
      if (text::is_letter(cp) || (cp >= U'0' && cp <= U'9')) {
        word.push_back(cp);
      } else {
        flush();
      }
    }
    flush();
    return out;
  };
  const auto ta = trigrams(a), tb = trigrams(b);
  if (ta.empty() && tb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : ta) common += tb.count(t);
  return static_cast<double>(common) / static_cast<double>(ta.size() + tb.size() - common);
}

}  // namespace surveykg::refs
