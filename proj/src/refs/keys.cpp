#include <algorithm>
#include <regex>
#include <set>

#include "surveykg/error.hpp"
#include "surveykg/refs/refs.hpp"
#include "surveykg/text.hpp"
#include "names.hpp"

namespace surveykg::refs {

namespace {

const std::set<std::string>& particles() {
  static const std::set<std::string> p = {"van", "von", "der", "den", "de", "del", "della", "di", "da", "du", "la",
                                          "le",  "ten", "ter", "dos", "das", "st.", "bin", "al", "el", "zu",  "vom"};
  return p;
}

std::string strip_punct(std::string s) {
  while (!s.empty() && (s.back() == ',' || s.back() == ';')) s.pop_back();
  return s;
}

}  // namespace

namespace detail {

bool is_initials_token(std::string_view token) {
  std::string letters;
  bool has_dot = false;
  for (char32_t cp : text::to_utf32(token)) {
    if (cp == U'.' || cp == U'-') {
      has_dot = has_dot || cp == U'.';
      continue;
    }
    if (cp == U',' || cp == U';') continue;
    if (!text::is_letter(cp) || !text::is_upper(cp)) return false;
    text::append_utf8(letters, cp);
  }
  const std::size_t n = text::to_utf32(letters).size();
  return n >= 1 && (n <= 2 || (n == 3 && has_dot));
}

std::vector<std::string> name_tokens(std::string_view name) {
  std::vector<std::string> out;
  for (auto& t : text::split(text::collapse_whitespace(text::trim(name)), " ")) {
    if (!t.empty()) out.push_back(strip_punct(t));
  }
  while (!out.empty() && (text::iequals(out.back(), "al.") || text::iequals(out.back(), "al") ||
                          text::iequals(out.back(), "et"))) {
    out.pop_back();
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_family(const std::vector<std::string>& tokens) {
  std::size_t lo = 0, hi = tokens.size();
  std::vector<std::string> given_lead, given_trail;
  while (hi - lo > 1 && is_initials_token(tokens[hi - 1])) --hi;
  while (hi - lo > 1 && is_initials_token(tokens[lo])) ++lo;
  std::size_t start = hi - 1;
  while (start > lo && particles().count(text::casefold(tokens[start - 1]))) --start;
  std::vector<std::string> family(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(hi));
  std::vector<std::string> given(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(start));
  given.insert(given.end(), tokens.begin() + static_cast<std::ptrdiff_t>(hi), tokens.end());
  return {family, given};
}

}  // namespace detail

using detail::is_initials_token;
using detail::name_tokens;
using detail::split_family;

std::string surname_of(std::string_view author) {
  const std::string a = text::nfc(text::trim(author));
  const auto comma = a.find(',');
  if (comma != std::string::npos) return text::casefold(text::collapse_whitespace(text::trim(a.substr(0, comma))));
  const auto tokens = name_tokens(a);
  if (tokens.empty()) return "";
  return text::casefold(text::join(split_family(tokens).first, " "));
}

std::string render_key(const CitationKey& key) {
  if (const auto* n = std::get_if<NumericKey>(&key)) return "[" + std::to_string(n->n) + "]";
  if (const auto* ay = std::get_if<AuthorYearKey>(&key)) {
    std::string s = ay->surname + ", " + std::to_string(ay->year);
    if (ay->suffix) s.push_back(*ay->suffix);
    return s;
  }
  const auto& g = std::get<GeneratedKey>(key);
  return g.surname + ":" + std::to_string(g.year);
}

CitationKey parse_citation_key(std::string_view cell) {
  const std::string s = text::nfc(text::collapse_whitespace(text::trim(cell)));
  auto fail = [&]() -> CitationKey {
    throw Error(Errc::UnrecognizedKeyFormat, "unrecognized citation key '" + s + "'");
  };
  if (s.empty()) return fail();

  static const std::regex numeric(R"(^(?:\[\s*(\d{1,5})\s*\]|\(\s*(\d{1,5})\s*\)|(\d{1,5}))$)");
  std::smatch m;
  if (std::regex_match(s, m, numeric)) {
    const std::string digits = m[1].matched ? m[1].str() : m[2].matched ? m[2].str() : m[3].str();
    const int n = std::stoi(digits);
    if (n < 1) return fail();
    return NumericKey{n};
  }

  static const std::regex generated(R"(^([^:\d]+):(\d{4})$)");
  if (std::regex_match(s, m, generated)) {
    const std::string surname = text::casefold(text::trim(m[1].str()));
    const int year = std::stoi(m[2].str());
    if (surname.empty() || year < 1000 || year > 2999) return fail();
    return GeneratedKey{surname, year};
  }

  static const std::regex author_year(R"(^(.*?)[\s,]*\(?\s*(\d{4})([a-z])?\s*\)?$)");
  if (std::regex_match(s, m, author_year)) {
    std::string authors = text::trim(m[1].str());
    const int year = std::stoi(m[2].str());
    if (year < 1000 || year > 2999) return fail();
    // first author only: cut at "et al", "and", "&" or a comma
    static const std::regex first(R"(^(.*?)(?:\s+et\s+al\.?|\s+and\s+|\s*&\s*|,).*$)");
    std::smatch fm;
    if (std::regex_match(authors, fm, first)) authors = fm[1].str();
    authors = text::trim(authors);
    bool has_letter = false;
    for (char32_t cp : text::to_utf32(authors)) has_letter = has_letter || text::is_letter(cp);
    if (!has_letter) return fail();
    for (char32_t cp : text::to_utf32(authors)) {
      if (cp >= U'0' && cp <= U'9') return fail();
    }
    const std::string surname = surname_of(authors);
    if (surname.empty()) return fail();
    AuthorYearKey key{surname, year, std::nullopt};
    if (m[3].matched) key.suffix = m[3].str()[0];
    return key;
  }
  return fail();
}

CitationKey generate_key(const BibEntry& entry) {
  if (entry.authors.empty() || !entry.year) {
    throw Error(Errc::MissingAuthorOrYear, "cannot generate a key for '" + entry.raw + "' without author and year");
  }
  const std::string surname = surname_of(entry.authors.front());
  if (surname.empty()) throw Error(Errc::MissingAuthorOrYear, "first author has no surname: " + entry.raw);
  return GeneratedKey{surname, *entry.year};
}

}  // namespace surveykg::refs
