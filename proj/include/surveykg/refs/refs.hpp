#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "surveykg/format/table.hpp"
#include "surveykg/layout/types.hpp"

namespace surveykg::refs {

struct NumericKey {
  int n = 1;
  bool operator==(const NumericKey&) const = default;
};

struct AuthorYearKey {
  std::string surname;  // case-folded, NFC
  int year = 0;
  std::optional<char> suffix;
  bool operator==(const AuthorYearKey&) const = default;
};

struct GeneratedKey {
  std::string surname;  // case-folded, NFC
  int year = 0;
  bool operator==(const GeneratedKey&) const = default;
};

using CitationKey = std::variant<NumericKey, AuthorYearKey, GeneratedKey>;

/// Canonical text: "[n]", "surname, year[suffix]" and "surname:year" for
/// generated keys. parse_citation_key(render_key(k)) == k.
std::string render_key(const CitationKey& key);

/// Throws Error{UnrecognizedKeyFormat}.
CitationKey parse_citation_key(std::string_view cell);

struct BibEntry {
  std::optional<CitationKey> key;
  std::string raw;
  std::optional<std::string> title;
  std::vector<std::string> authors;  // "Family, Given" or "Family"
  std::optional<int> year;
  std::optional<int> month;
  std::optional<std::string> doi;

  bool operator==(const BibEntry&) const = default;
};

struct LinkResult {
  int row_index = 0;
  std::optional<BibEntry> entry;  // set when linked
  std::string key_text;           // the reference cell text

  bool linked() const { return entry.has_value(); }
  bool operator==(const LinkResult&) const = default;
};

/// First-author surname used for matching: comma form "Family, Given";
/// otherwise initials are dropped and the last name keeps its particles
/// ("Ludwig van Beethoven" -> "van beethoven"). Case-folded.
std::string surname_of(std::string_view author);

/// Best-effort field extraction; fields that cannot be found stay absent.
BibEntry parse_citation_string(std::string_view raw);

/// Locates the last "References"/"Bibliography" heading and splits the
/// following lines into entries by "[n]" / "n." markers or hanging indent.
/// Throws Error{NoReferenceSection}.
std::vector<BibEntry> parse_reference_list(const layout::Document& doc);

/// Numeric keys match the single entry carrying that marker. Author-year
/// keys match by first-author surname and year; a suffix picks among several
/// hits in list order; several hits without a suffix is NotFound.
std::optional<BibEntry> link_key(const CitationKey& key, const std::vector<BibEntry>& entries);

/// One LinkResult per data row, from the Reference column's cell.
std::vector<LinkResult> link_rows(const format::SurveyTable& table, const std::vector<BibEntry>& entries);

/// Throws Error{MissingAuthorOrYear}.
CitationKey generate_key(const BibEntry& entry);

inline constexpr std::string_view kMetadataLabels[5] = {"Title", "Authors", "Month", "Year", "DOI"};

/// Appends the five Metadata columns. Throws Error{LinkCoverageMismatch} when
/// links do not cover each row exactly once and UnresolvedRowsError when any
/// row is not linked.
format::SurveyTable append_metadata_columns(const format::SurveyTable& table, const std::vector<LinkResult>& links);

/// Trigram similarity (Jaccard over padded word trigrams) of normalized text.
double title_similarity(std::string_view a, std::string_view b);

}  // namespace surveykg::refs
