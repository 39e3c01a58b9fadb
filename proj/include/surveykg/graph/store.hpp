#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "surveykg/format/table.hpp"

namespace surveykg::graph {

inline constexpr std::string_view kPaperClass = "Paper";
inline constexpr std::string_view kContributionClass = "Contribution";
inline constexpr std::string_view kComparisonClass = "Comparison";

/// Reserved predicates, created in this order as P0..P9 in every store.
inline constexpr std::string_view kReservedPredicates[] = {
    "hasTitle",        "hasAuthor",          "hasMonth",        "hasYear",          "hasDOI",
    "hasContribution", "hasSourceReference", "compareContribution", "hasReferenceKey", "hasTableId"};

struct Resource {
  std::string id;
  std::string label;
  std::set<std::string> classes;

  bool operator==(const Resource&) const = default;
};

struct Predicate {
  std::string id;
  std::string label;
  bool reserved = false;

  bool operator==(const Predicate&) const = default;
};

struct Statement {
  std::string subject;    // resource id
  std::string predicate;  // predicate id
  std::string object;     // resource id, or the literal value
  bool literal = false;

  bool operator==(const Statement&) const = default;
};

struct SettingsEntry {
  std::string table_id;
  std::string title;
  std::string source_reference;

  bool operator==(const SettingsEntry&) const = default;
};

/// Settings file: a JSON array of {"table_id", "title", "source_reference"}.
/// Throws Error{SettingsError}.
std::vector<SettingsEntry> parse_settings(std::string_view json_text);
std::string render_settings(const std::vector<SettingsEntry>& entries);
std::vector<SettingsEntry> read_settings(const std::filesystem::path& path);
void write_settings(const std::filesystem::path& path, const std::vector<SettingsEntry>& entries);

struct Stats {
  std::size_t papers = 0;
  std::size_t contributions = 0;
  std::size_t comparisons = 0;
  std::size_t resources = 0;
  std::size_t statements = 0;
  /// Data statements on contributions, one per non-empty data cell.
  std::size_t cells_plain = 0;
  /// cells_plain plus five metadata cells per contribution.
  std::size_t cells_with_meta = 0;

  bool operator==(const Stats&) const = default;
};

/// Dedup key of a paper: "doi:" + case-folded DOI when present, else
/// "title:" + the normalized title without trailing punctuation.
std::string paper_key(std::string_view doi, std::string_view title);

/// Knowledge graph of papers, contributions and comparisons. Writers are
/// serialized; readers see a consistent snapshot. A store opened on a path
/// appends every mutation to that file.
class GraphStore {
 public:
  /// In-memory store.
  GraphStore();
  /// Opens or creates the store file. Throws Error{CorruptStore, IoError}.
  static GraphStore open(const std::filesystem::path& path);
  GraphStore(GraphStore&&) noexcept;
  GraphStore& operator=(GraphStore&&) noexcept;
  ~GraphStore();

  /// Matches on the normalized label among resources of `cls`, or among
  /// unclassified resources when no class is given. Throws Error{EmptyLabel}.
  Resource lookup_or_create_resource(std::string_view label, std::optional<std::string_view> cls = std::nullopt);
  /// One predicate per normalized label, distinct from the reserved ones.
  Predicate lookup_or_create_predicate(std::string_view label);

  /// Throws Error{MissingTitle, MissingSourceReference}.
  std::string create_comparison(const SettingsEntry& entry);

  /// Adds the row's paper (deduplicated) and its contribution to the
  /// comparison; a second row for the same paper in the same comparison
  /// merges into the existing contribution. Returns the contribution id.
  /// Throws Error{MissingMetadataColumns, UnresolvedReference,
  /// UnknownComparison, IndexOutOfRange}.
  std::string ingest_row(const format::SurveyTable& table, std::size_t row, const std::string& comparison);
  std::vector<std::string> ingest_table(const format::SurveyTable& table, const std::string& comparison);

  /// Reference column, data columns in first-use order, then the five
  /// metadata columns; one row per contribution. Throws Error{UnknownComparison}.
  format::SurveyTable render_comparison(const std::string& comparison) const;

  std::vector<Resource> resources() const;
  std::vector<Predicate> predicates() const;
  std::vector<Statement> statements() const;
  std::vector<std::string> comparisons() const;
  std::vector<std::string> papers() const;
  /// Contribution ids of a comparison in insertion order.
  std::vector<std::string> contributions_of(const std::string& comparison) const;
  std::optional<Resource> resource(const std::string& id) const;

  Stats stats() const;
  std::string export_ntriples() const;
  std::string export_json() const;
  /// Dangling subject, predicate or object references; empty when sound.
  std::vector<std::string> check_integrity() const;

  /// Rewrites the store file from the current state.
  void compact();
  /// Flushes and detaches from the file; the store stays readable.
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace surveykg::graph
